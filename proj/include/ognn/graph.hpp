#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "ognn/common.hpp"

namespace ognn::graph {

using Edge = std::pair<std::size_t, std::size_t>;

/// Undirected simple graph with optional node features and labels.
/// Edges are stored once with u < v, sorted lexicographically.
struct Graph {
  std::size_t n = 0;
  std::vector<Edge> edges;
  std::optional<Matrix> features;
  std::optional<std::vector<int>> labels;
  int num_classes = 0;

  std::vector<std::size_t> degrees() const;
};

enum class SelfLoopPolicy { kReject, kDrop };

Graph build_graph(std::span<const Edge> edge_list, std::size_t n,
                  SelfLoopPolicy policy = SelfLoopPolicy::kReject);

/// Symmetric matrix in compressed sparse row form.
struct SparseMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> row_offsets;
  std::vector<std::size_t> col_indices;
  std::vector<double> values;

  std::size_t nnz() const { return values.size(); }
  Matrix to_dense() const;
  static SparseMatrix identity(std::size_t n);
};

/// D^{-1/2} A D^{-1/2}, optionally over A + I.
SparseMatrix propagation_matrix(const Graph& g, bool add_self_loops = false);

/// Y = M X, one column at a time, columns within a row visited in ascending order.
GraphSignal spmv(const SparseMatrix& m, const GraphSignal& x);
void spmv_into(const SparseMatrix& m, const GraphSignal& x, GraphSignal& y);

struct LoadOptions {
  bool csv_header = false;
  std::optional<std::size_t> num_nodes;
  std::optional<int> num_classes;
  SelfLoopPolicy self_loops = SelfLoopPolicy::kReject;
};

/// Edge list ("u v" per line) plus optional feature and label CSVs. When
/// num_nodes is not given, n is one past the largest endpoint.
Graph load_dataset(const std::filesystem::path& edge_path,
                   const std::optional<std::filesystem::path>& feature_path,
                   const std::optional<std::filesystem::path>& label_path,
                   const LoadOptions& opts = {});

struct GrayImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  std::uint8_t at(std::size_t r, std::size_t c) const { return pixels[r * width + c]; }
};

GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

/// 4-connected pixel grid; node id = row * width + col, signal = intensity / 255.
std::pair<Graph, GraphSignal> grid_graph_from_image(const GrayImage& img);

}  // namespace ognn::graph
