#include "ognn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace ognn::graph {

std::vector<std::size_t> Graph::degrees() const {
  std::vector<std::size_t> deg(n, 0);
  for (const auto& [u, v] : edges) {
    ++deg[u];
    ++deg[v];
  }
  return deg;
}

Graph build_graph(std::span<const Edge> edge_list, std::size_t n, SelfLoopPolicy policy) {
  Graph g;
  g.n = n;
  g.edges.reserve(edge_list.size());
  for (const auto& [u, v] : edge_list) {
    if (u >= n || v >= n)
      throw GraphError("endpoint out of range: (" + std::to_string(u) + ", " + std::to_string(v) +
                       ") with n = " + std::to_string(n));
    if (u == v) {
      if (policy == SelfLoopPolicy::kDrop) continue;
      throw GraphError("self-loop on node " + std::to_string(u));
    }
    g.edges.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  return g;
}

Matrix SparseMatrix::to_dense() const {
  Matrix d(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = row_offsets[r]; k < row_offsets[r + 1]; ++k) d(r, col_indices[k]) = values[k];
  return d;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  SparseMatrix m;
  m.n = n;
  m.row_offsets.resize(n + 1);
  m.col_indices.resize(n);
  m.values.assign(n, 1.0);
  for (std::size_t i = 0; i <= n; ++i) m.row_offsets[i] = i;
  for (std::size_t i = 0; i < n; ++i) m.col_indices[i] = i;
  return m;
}

SparseMatrix propagation_matrix(const Graph& g, bool add_self_loops) {
  std::vector<std::vector<std::size_t>> adj(g.n);
  for (const auto& [u, v] : g.edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  if (add_self_loops)
    for (std::size_t i = 0; i < g.n; ++i) adj[i].push_back(i);

  std::vector<double> inv_sqrt_deg(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    if (adj[i].empty())
      throw GraphError("isolated node " + std::to_string(i) +
                       " has degree 0; enable self-loops or remove it");
    inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<double>(adj[i].size()));
  }

  SparseMatrix p;
  p.n = g.n;
  p.row_offsets.assign(g.n + 1, 0);
  for (std::size_t i = 0; i < g.n; ++i) {
    auto& row = adj[i];
    std::sort(row.begin(), row.end());
    p.row_offsets[i + 1] = p.row_offsets[i] + row.size();
    for (std::size_t j : row) {
      p.col_indices.push_back(j);
      p.values.push_back(inv_sqrt_deg[i] * inv_sqrt_deg[j]);
    }
  }
  return p;
}

void spmv_into(const SparseMatrix& m, const GraphSignal& x, GraphSignal& y) {
  if (x.rows() != m.n)
    throw std::invalid_argument("spmv: matrix is " + std::to_string(m.n) + "x" +
                                std::to_string(m.n) + " but signal has " +
                                std::to_string(x.rows()) + " rows");
  if (y.rows() != m.n || y.cols() != x.cols()) y = GraphSignal(m.n, x.cols());
  const std::size_t c = x.cols();
  for (std::size_t r = 0; r < m.n; ++r) {
    auto out = y.row(r);
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t k = m.row_offsets[r]; k < m.row_offsets[r + 1]; ++k) {
      const double w = m.values[k];
      auto in = x.row(m.col_indices[k]);
      for (std::size_t j = 0; j < c; ++j) out[j] += w * in[j];
    }
  }
}

GraphSignal spmv(const SparseMatrix& m, const GraphSignal& x) {
  GraphSignal y;
  spmv_into(m, x, y);
  return y;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string strip(std::string s) {
  const auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

[[noreturn]] void parse_fail(const std::filesystem::path& p, std::size_t line, const std::string& what) {
  throw InputError(p.string() + ":" + std::to_string(line) + ": " + what);
}

std::ifstream open_or_throw(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw InputError("cannot open " + p.string());
  return in;
}

std::vector<std::vector<std::string>> read_csv_rows(const std::filesystem::path& p, bool header,
                                                    std::vector<std::size_t>& line_numbers) {
  auto in = open_or_throw(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::size_t lineno = 0;
  bool skipped = !header;
  while (std::getline(in, line)) {
    ++lineno;
    if (strip(line).empty()) continue;
    if (!skipped) {
      skipped = true;
      continue;
    }
    rows.push_back(split_csv(line));
    line_numbers.push_back(lineno);
  }
  return rows;
}

double parse_double(const std::string& cell, const std::filesystem::path& p, std::size_t line) {
  const std::string s = strip(cell);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    parse_fail(p, line, "not a number: '" + s + "'");
  }
  if (used != s.size()) parse_fail(p, line, "not a number: '" + s + "'");
  return v;
}

long long parse_int(const std::string& cell, const std::filesystem::path& p, std::size_t line) {
  const std::string s = strip(cell);
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    parse_fail(p, line, "not an integer: '" + s + "'");
  }
  if (used != s.size()) parse_fail(p, line, "not an integer: '" + s + "'");
  return v;
}

}  // namespace

Graph load_dataset(const std::filesystem::path& edge_path,
                   const std::optional<std::filesystem::path>& feature_path,
                   const std::optional<std::filesystem::path>& label_path, const LoadOptions& opts) {
  std::vector<Edge> edges;
  std::size_t max_node = 0;
  {
    auto in = open_or_throw(edge_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (strip(line).empty() || strip(line).front() == '#') continue;
      std::istringstream ss(line);
      long long u = -1, v = -1;
      std::string extra;
      if (!(ss >> u >> v) || (ss >> extra)) parse_fail(edge_path, lineno, "expected 'u v'");
      if (u < 0 || v < 0) parse_fail(edge_path, lineno, "negative node id");
      edges.emplace_back(static_cast<std::size_t>(u), static_cast<std::size_t>(v));
      max_node = std::max({max_node, edges.back().first, edges.back().second});
    }
  }
  const std::size_t n = opts.num_nodes.value_or(edges.empty() ? 0 : max_node + 1);
  Graph g = build_graph(edges, n, opts.self_loops);

  if (feature_path) {
    std::vector<std::size_t> lines;
    auto rows = read_csv_rows(*feature_path, opts.csv_header, lines);
    if (rows.size() != n)
      throw InputError(feature_path->string() + ": row count mismatch: " + std::to_string(rows.size()) +
                       " feature rows for " + std::to_string(n) + " nodes");
    const std::size_t r = rows.empty() ? 0 : rows.front().size();
    Matrix x(n, r);
    for (std::size_t i = 0; i < n; ++i) {
      if (rows[i].size() != r)
        parse_fail(*feature_path, lines[i],
                   "expected " + std::to_string(r) + " columns, got " + std::to_string(rows[i].size()));
      for (std::size_t j = 0; j < r; ++j) x(i, j) = parse_double(rows[i][j], *feature_path, lines[i]);
    }
    g.features = std::move(x);
  }

  if (label_path) {
    std::vector<std::size_t> lines;
    auto rows = read_csv_rows(*label_path, opts.csv_header, lines);
    if (rows.size() != n)
      throw InputError(label_path->string() + ": row count mismatch: " + std::to_string(rows.size()) +
                       " labels for " + std::to_string(n) + " nodes");
    std::vector<int> labels(n);
    long long max_label = -1;
    for (std::size_t i = 0; i < n; ++i) {
      if (rows[i].size() != 1) parse_fail(*label_path, lines[i], "expected one label per row");
      const long long y = parse_int(rows[i][0], *label_path, lines[i]);
      if (y < 0) parse_fail(*label_path, lines[i], "negative class index");
      if (opts.num_classes && y >= *opts.num_classes)
        parse_fail(*label_path, lines[i],
                   "class index " + std::to_string(y) + " out of range [0, " +
                       std::to_string(*opts.num_classes) + ")");
      labels[i] = static_cast<int>(y);
      max_label = std::max(max_label, y);
    }
    const int c = opts.num_classes.value_or(static_cast<int>(max_label + 1));
    std::vector<bool> seen(static_cast<std::size_t>(c), false);
    for (int y : labels) seen[static_cast<std::size_t>(y)] = true;
    for (int k = 0; k < c; ++k)
      if (!seen[static_cast<std::size_t>(k)])
        throw InputError(label_path->string() + ": class " + std::to_string(k) + " never occurs");
    g.labels = std::move(labels);
    g.num_classes = c;
  }
  return g;
}

namespace {

// Reads the next whitespace-delimited PGM header token, skipping comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string rest;
      std::getline(in, rest);
      if (!tok.empty()) break;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(ch);
  }
  return tok;
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  const std::string magic = pgm_token(in);
  if (magic != "P2" && magic != "P5") throw InputError(path.string() + ": not a PGM (P2/P5) file");
  GrayImage img;
  long long w = 0, h = 0, maxval = 0;
  try {
    w = std::stoll(pgm_token(in));
    h = std::stoll(pgm_token(in));
    maxval = std::stoll(pgm_token(in));
  } catch (const std::exception&) {
    throw InputError(path.string() + ": malformed PGM header");
  }
  if (w <= 0 || h <= 0) throw InputError(path.string() + ": empty image");
  if (maxval != 255) throw InputError(path.string() + ": maxval must be 255");
  img.width = static_cast<std::size_t>(w);
  img.height = static_cast<std::size_t>(h);
  img.pixels.resize(img.width * img.height);
  if (magic == "P5") {
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
      throw InputError(path.string() + ": truncated pixel data");
  } else {
    for (auto& px : img.pixels) {
      const std::string tok = pgm_token(in);
      if (tok.empty()) throw InputError(path.string() + ": truncated pixel data");
      const long long v = std::stoll(tok);
      if (v < 0 || v > 255) throw InputError(path.string() + ": pixel value out of range");
      px = static_cast<std::uint8_t>(v);
    }
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
}

std::pair<Graph, GraphSignal> grid_graph_from_image(const GrayImage& img) {
  if (img.height == 0 || img.width == 0 || img.pixels.empty()) throw GraphError("empty image");
  if (img.height < 2 || img.width < 2) throw GraphError("image must be at least 2x2");
  const std::size_t h = img.height, w = img.width;
  std::vector<Edge> edges;
  edges.reserve(h * (w - 1) + w * (h - 1));
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t id = r * w + c;
      if (c + 1 < w) edges.emplace_back(id, id + 1);
      if (r + 1 < h) edges.emplace_back(id, id + w);
    }
  Graph g = build_graph(edges, h * w);
  GraphSignal x(h * w, 1);
  for (std::size_t i = 0; i < h * w; ++i) x(i, 0) = img.pixels[i] / 255.0;
  return {std::move(g), std::move(x)};
}

}  // namespace ognn::graph
