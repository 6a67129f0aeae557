#include <algorithm>
#include <cmath>
#include <numeric>

#include "ognn/rng.hpp"
#include "ognn/train.hpp"

namespace ognn::train {

Split split_nodes(std::size_t n, std::uint64_t seed, double train_ratio, double val_ratio) {
  if (n < 5) throw std::invalid_argument("split_nodes: need at least 5 nodes, got " + std::to_string(n));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  rng.shuffle(perm);
  const auto n_train = static_cast<std::size_t>(std::floor(train_ratio * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::floor(val_ratio * static_cast<double>(n)));
  Split s;
  s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
               perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

graph::Graph planted_partition(const PlantedPartitionSpec& spec, std::uint64_t seed) {
  if (spec.blocks < 2 || spec.n < static_cast<std::size_t>(2 * spec.blocks))
    throw std::invalid_argument("planted_partition: need >= 2 blocks with >= 2 nodes each");
  if (spec.feature_dim < static_cast<std::size_t>(spec.blocks))
    throw std::invalid_argument("planted_partition: feature_dim must be >= blocks");
  Rng rng(seed);
  const std::size_t n = spec.n;
  const auto blocks = static_cast<std::size_t>(spec.blocks);
  std::vector<int> block(n);
  for (std::size_t i = 0; i < n; ++i) block[i] = static_cast<int>(i * blocks / n);

  std::vector<graph::Edge> edges;
  std::vector<std::size_t> degree(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = block[i] == block[j] ? spec.p_in : spec.p_out;
      if (rng.uniform() < p) {
        edges.emplace_back(i, j);
        ++degree[i];
        ++degree[j];
      }
    }
  for (std::size_t i = 0; i < n; ++i) {
    if (degree[i] > 0) continue;
    std::vector<std::size_t> mates;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && block[j] == block[i]) mates.push_back(j);
    const std::size_t j = mates[rng.below(mates.size())];
    edges.emplace_back(i, j);
    ++degree[i];
    ++degree[j];
  }

  graph::Graph g = graph::build_graph(edges, n);
  Matrix x(n, spec.feature_dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < spec.feature_dim; ++d) x(i, d) = spec.noise * rng.normal();
    x(i, static_cast<std::size_t>(block[i])) += 1.0;
  }
  g.features = std::move(x);
  g.labels = std::move(block);
  g.num_classes = spec.blocks;
  return g;
}

std::vector<graph::GrayImage> synthetic_images(std::size_t count, std::size_t size, std::uint64_t seed) {
  if (size < 2) throw std::invalid_argument("synthetic_images: size must be >= 2");
  Rng rng(seed);
  std::vector<graph::GrayImage> out;
  const double s = static_cast<double>(size);
  for (std::size_t img = 0; img < count; ++img) {
    const int blobs = 2 + static_cast<int>(rng.below(4));
    struct Blob {
      double r, c, sigma, amp;
    };
    std::vector<Blob> bs;
    for (int k = 0; k < blobs; ++k)
      bs.push_back({rng.uniform(0.0, s), rng.uniform(0.0, s), rng.uniform(s / 8.0, s / 3.0), rng.uniform(0.3, 1.0)});
    std::vector<double> field(size * size, 0.0);
    for (std::size_t r = 0; r < size; ++r)
      for (std::size_t c = 0; c < size; ++c) {
        double v = 0.0;
        for (const auto& b : bs) {
          const double dr = static_cast<double>(r) - b.r, dc = static_cast<double>(c) - b.c;
          v += b.amp * std::exp(-(dr * dr + dc * dc) / (2.0 * b.sigma * b.sigma));
        }
        field[r * size + c] = v;
      }
    const auto [lo, hi] = std::minmax_element(field.begin(), field.end());
    const double span = std::max(*hi - *lo, 1e-12);
    graph::GrayImage gi;
    gi.height = gi.width = size;
    gi.pixels.resize(size * size);
    for (std::size_t i = 0; i < field.size(); ++i)
      gi.pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * (field[i] - *lo) / span));
    out.push_back(std::move(gi));
  }
  return out;
}

}  // namespace ognn::train
