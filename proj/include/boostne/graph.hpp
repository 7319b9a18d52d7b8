#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "boostne/matrix.hpp"

namespace boostne {

struct EdgeListFormat {
  char comment_prefix = '#';
  double default_weight = 1.0;
};

struct WeightedEdge {
  std::uint32_t u;
  std::uint32_t v;
  double weight;
};

/// Immutable undirected weighted graph. The adjacency matrix is symmetric,
/// has a zero diagonal and stores only positive weights.
class Graph {
 public:
  Graph() = default;

  /// Builds from an arbitrary edge list over nodes [0, ids.size()). Self-loops
  /// are dropped; (u,v) and (v,u) collapse into one undirected edge whose
  /// weight is the sum of all occurrences.
  static Graph from_edges(std::vector<std::string> node_ids, std::span<const WeightedEdge> edges);

  std::size_t num_nodes() const noexcept { return node_ids_.size(); }
  std::size_t num_edges() const noexcept { return num_edges_; }
  const CsrMatrix& adjacency() const noexcept { return adjacency_; }
  std::span<const double> degree() const noexcept { return degree_; }
  double volume() const noexcept { return volume_; }

  const std::vector<std::string>& node_ids() const noexcept { return node_ids_; }
  const std::string& node_id(std::size_t index) const { return node_ids_.at(index); }
  std::optional<std::size_t> index_of(const std::string& id) const;

  /// Hash of ids and adjacency structure/weights.
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

 private:
  std::vector<std::string> node_ids_;
  std::unordered_map<std::string, std::size_t> index_;
  CsrMatrix adjacency_;
  std::vector<double> degree_;
  double volume_ = 0.0;
  std::size_t num_edges_ = 0;
  std::uint64_t fingerprint_ = 0;
};

/// Parses `src dst [weight]` lines. Ids are arbitrary tokens mapped to dense
/// indices in first-seen order; a self-loop line still registers its node.
/// Throws ParseError on malformed lines and DataError when no edge remains.
Graph load_edge_list(std::istream& in, const EdgeListFormat& format = {});
Graph load_edge_list_file(const std::string& path, const EdgeListFormat& format = {});

/// Writes each undirected edge once as `src dst weight` (src index < dst
/// index), with weights printed at round-trip precision.
void write_edge_list(std::ostream& out, const Graph& g);

/// Copy of `g` without zero-degree nodes (ids keep their relative order).
Graph drop_isolated(const Graph& g);

/// Ids of zero-degree nodes.
std::vector<std::string> isolated_nodes(const Graph& g);

/// S = D^{-1} A. Throws DataError naming the first zero-degree node.
CsrMatrix transition_matrix(const Graph& g);

struct WalkSumOptions {
  /// Dense n x n results are refused above this node count.
  std::size_t max_dense_nodes = 20000;
};

/// Throws ResourceError when an n x n dense matrix would exceed the ceiling.
void check_dense_budget(std::size_t n, const WalkSumOptions& options);

/// next = S * current, row-parallel. `current` and `next` are n x n.
void sparse_dense_product(const CsrMatrix& s, const DenseMatrix& current, DenseMatrix& next);

/// Dense S^p by repeated sparse-dense products.
DenseMatrix transition_power(const Graph& g, int p, const WalkSumOptions& options = {});

/// P = (1/T) * sum_{r=1..T} S^r, accumulated with sparse x dense products.
DenseMatrix walk_sum(const Graph& g, int window, const WalkSumOptions& options = {});

}  // namespace boostne
