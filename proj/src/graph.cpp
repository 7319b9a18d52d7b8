#include "boostne/graph.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "boostne/errors.hpp"
#include "boostne/hashing.hpp"
#include "boostne/kernels.hpp"
#include "boostne/parallel.hpp"

namespace boostne {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

std::optional<double> parse_double(std::string_view token) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) return std::nullopt;
  return value;
}

}  // namespace

Graph Graph::from_edges(std::vector<std::string> node_ids, std::span<const WeightedEdge> edges) {
  Graph g;
  const std::size_t n = node_ids.size();
  std::vector<Triplet> triplets;
  triplets.reserve(edges.size() * 2);
  for (const auto& e : edges) {
    if (e.u >= n || e.v >= n) throw DataError("edge endpoint outside node range");
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) throw DataError("edge weight must be positive and finite");
    if (e.u == e.v) continue;
    triplets.push_back({e.u, e.v, e.weight});
    triplets.push_back({e.v, e.u, e.weight});
  }
  g.adjacency_ = CsrMatrix::from_triplets(n, n, std::move(triplets));

  g.degree_.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    for (const double w : g.adjacency_.row_values(i)) d += w;
    g.degree_[i] = d;
  }
  for (const double d : g.degree_) g.volume_ += d;
  g.num_edges_ = g.adjacency_.nnz() / 2;

  g.index_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!g.index_.emplace(node_ids[i], i).second) throw DataError("duplicate node id '" + node_ids[i] + "'");
  }
  g.node_ids_ = std::move(node_ids);

  Fingerprint fp;
  for (const auto& id : g.node_ids_) fp.text(id).value('\n');
  fp.values(std::span<const std::size_t>(g.adjacency_.row_ptr()));
  fp.values(std::span<const std::uint32_t>(g.adjacency_.col_idx()));
  fp.values(std::span<const double>(g.adjacency_.values()));
  g.fingerprint_ = fp.digest();
  return g;
}

std::optional<std::size_t> Graph::index_of(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Graph load_edge_list(std::istream& in, const EdgeListFormat& format) {
  std::vector<std::string> ids;
  std::unordered_map<std::string, std::uint32_t> index;
  std::vector<WeightedEdge> edges;
  auto intern = [&](std::string_view token) {
    const auto [it, inserted] = index.emplace(std::string(token), static_cast<std::uint32_t>(ids.size()));
    if (inserted) ids.emplace_back(token);
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens.front().front() == format.comment_prefix) continue;
    if (tokens.size() != 2 && tokens.size() != 3) {
      throw ParseError(line_no, "expected 'src dst [weight]', got " + std::to_string(tokens.size()) + " tokens");
    }
    double weight = format.default_weight;
    if (tokens.size() == 3) {
      const auto parsed = parse_double(tokens[2]);
      if (!parsed) throw ParseError(line_no, "non-numeric weight '" + std::string(tokens[2]) + "'");
      if (!(*parsed > 0.0) || !std::isfinite(*parsed)) {
        throw ParseError(line_no, "weight must be positive and finite, got " + std::string(tokens[2]));
      }
      weight = *parsed;
    }
    const auto u = intern(tokens[0]);
    const auto v = intern(tokens[1]);
    edges.push_back({u, v, weight});
  }

  Graph g = Graph::from_edges(std::move(ids), edges);
  if (g.num_edges() == 0) throw DataError("degenerate input: graph has no edges");
  return g;
}

Graph load_edge_list_file(const std::string& path, const EdgeListFormat& format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open edge list " + path);
  try {
    return load_edge_list(in, format);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail(), path);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_edge_list(std::ostream& out, const Graph& g) {
  // Rows are emitted in index order with the lower endpoint first, so a reload
  // sees ids in the same first-seen order. A node without lower-index
  // neighbours is introduced by a self-loop line, which the loader drops.
  const auto& a = g.adjacency();
  char buf[32];
  for (std::size_t j = 0; j < g.num_nodes(); ++j) {
    const auto cols = a.row_cols(j);
    const auto vals = a.row_values(j);
    if (cols.empty() || cols.front() > j) out << g.node_id(j) << ' ' << g.node_id(j) << " 1\n";
    for (std::size_t k = 0; k < cols.size() && cols[k] < j; ++k) {
      const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), vals[k]);
      out << g.node_id(cols[k]) << ' ' << g.node_id(j) << ' ' << std::string_view(buf, end - buf) << '\n';
    }
  }
}

std::vector<std::string> isolated_nodes(const Graph& g) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    if (g.degree()[i] <= 0.0) out.push_back(g.node_id(i));
  }
  return out;
}

Graph drop_isolated(const Graph& g) {
  std::vector<std::uint32_t> remap(g.num_nodes(), 0);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    if (g.degree()[i] > 0.0) {
      remap[i] = static_cast<std::uint32_t>(ids.size());
      ids.push_back(g.node_id(i));
    }
  }
  std::vector<WeightedEdge> edges;
  const auto& a = g.adjacency();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (cols[k] > i) edges.push_back({remap[i], remap[cols[k]], vals[k]});
    }
  }
  return Graph::from_edges(std::move(ids), edges);
}

CsrMatrix transition_matrix(const Graph& g) {
  const auto& a = g.adjacency();
  CsrBuilder builder(a.rows(), a.cols(), a.nnz());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double d = g.degree()[i];
    if (!(d > 0.0)) {
      throw DataError("node '" + g.node_id(i) +
                      "' has zero degree; its transition row is undefined (use --drop-isolated)");
    }
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) builder.push(cols[k], vals[k] / d);
    builder.finish_row();
  }
  return std::move(builder).finish();
}

void check_dense_budget(std::size_t n, const WalkSumOptions& options) {
  if (n > options.max_dense_nodes) {
    std::ostringstream msg;
    msg << "dense " << n << "x" << n << " matrix refused: node count exceeds the ceiling of "
        << options.max_dense_nodes << " (about " << (static_cast<double>(n) * n * 8.0 / 1e9) << " GB per copy)";
    throw ResourceError(msg.str());
  }
}

void sparse_dense_product(const CsrMatrix& s, const DenseMatrix& current, DenseMatrix& next) {
  parallel_for(0, s.rows(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      auto out = next.row(i);
      std::fill(out.begin(), out.end(), 0.0);
      const auto cols = s.row_cols(i);
      const auto vals = s.row_values(i);
      for (std::size_t k = 0; k < cols.size(); ++k) kernels::axpy(vals[k], current.row(cols[k]), out);
    }
  }, 16);
}

DenseMatrix transition_power(const Graph& g, int p, const WalkSumOptions& options) {
  if (p < 1) throw UsageError("transition step must be >= 1, got " + std::to_string(p));
  const std::size_t n = g.num_nodes();
  check_dense_budget(n, options);
  const CsrMatrix s = transition_matrix(g);
  DenseMatrix current = s.to_dense();
  DenseMatrix next(n, n);
  for (int r = 2; r <= p; ++r) {
    sparse_dense_product(s, current, next);
    std::swap(current, next);
  }
  return current;
}

DenseMatrix walk_sum(const Graph& g, int window, const WalkSumOptions& options) {
  if (window < 1) throw UsageError("window size must be >= 1, got " + std::to_string(window));
  const std::size_t n = g.num_nodes();
  check_dense_budget(n, options);
  const CsrMatrix s = transition_matrix(g);

  DenseMatrix current = s.to_dense();
  DenseMatrix sum = current;
  DenseMatrix next(n, n);
  for (int r = 2; r <= window; ++r) {
    sparse_dense_product(s, current, next);
    std::swap(current, next);
    kernels::axpy(1.0, current.values(), sum.values());
  }
  if (window > 1) kernels::scale(1.0 / window, sum.values());
  return sum;
}

}  // namespace boostne
