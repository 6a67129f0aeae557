#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "ognn/common.hpp"
#include "ognn/graph.hpp"

namespace ognn::spectral {

inline constexpr std::size_t kMaxDenseSize = 4096;

struct EigenPair {
  std::vector<double> eigenvalues;  // ascending
  Matrix eigenvectors;              // orthonormal columns
};

/// Householder tridiagonalization followed by implicit QL.
EigenPair dense_sym_eig(const Matrix& m);

enum class FilterKind { kLow, kHigh, kBand, kReject, kComb };

inline constexpr FilterKind kAllFilters[] = {FilterKind::kLow, FilterKind::kHigh, FilterKind::kBand,
                                             FilterKind::kReject, FilterKind::kComb};

/// Target response at Laplacian eigenvalue lambda in [0, 2].
double target_filter(FilterKind kind, double lambda);

std::string_view filter_name(FilterKind kind);
/// Formula string recorded in experiment metadata.
std::string_view filter_formula(FilterKind kind);
/// Accepts low, high, band, reject, comb (any case) and "sin-reject" as an
/// alias for the |sin(pi lambda)| response.
FilterKind parse_filter_kind(std::string_view name);

/// U diag(f(eigenvalue)) U^T x.
GraphSignal apply_spectral(const EigenPair& eig, const std::function<double(double)>& f, const GraphSignal& x);

/// Eigendecomposition of the normalized Laplacian I - P.
EigenPair laplacian_eig(const graph::Graph& g, bool add_self_loops = false);

/// Filters x by g(lambda) over the Laplacian spectrum of g.
GraphSignal apply_exact_filter(const graph::Graph& g, const std::function<double(double)>& response,
                               const GraphSignal& x, bool add_self_loops = false);
GraphSignal apply_exact_filter(const graph::Graph& g, FilterKind kind, const GraphSignal& x,
                               bool add_self_loops = false);

}  // namespace ognn::spectral
