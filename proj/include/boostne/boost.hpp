#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "boostne/connectivity.hpp"
#include "boostne/matrix.hpp"
#include "boostne/nmf.hpp"

namespace boostne {

struct BoostConfig {
  int levels = 8;
  int level_rank = 16;
  /// Template for every level's solver; its rank and seed are overwritten per
  /// level (rank = level_rank, seed = seed + level index counted from 0).
  NmfConfig nmf;
  std::uint64_t seed = 42;
  /// Permit total dimension >= node count.
  bool allow_wide = false;

  int dimension() const noexcept { return levels * level_rank; }
  void validate(std::size_t num_nodes) const;
  NmfConfig level_config(int level_index) const;
};

struct LevelFactor {
  int level = 0;  // 1-based
  FactorPair factors;
  double residual_norm_before = 0.0;
  std::size_t residual_nnz_before = 0;
};

struct MultiLevelEmbedding {
  std::vector<LevelFactor> levels;
  /// n x (levels * level_rank), column block i holds level i+1's U.
  DenseMatrix embedding;
  BoostConfig config;
  std::uint64_t connectivity_fingerprint = 0;
  /// ||R_{k+1}||_F and nnz(R_{k+1}), the residual left after the last level.
  double terminal_norm = 0.0;
  std::size_t terminal_nnz = 0;
  std::vector<std::string> warnings;
};

struct TraceEntry {
  int level = 0;
  double frobenius_norm = 0.0;
  std::size_t nnz = 0;
};

/// R' = max(R - U V, 0), evaluated on the support of R only. Entries at or
/// below the storage threshold are dropped.
CsrMatrix residual(const CsrMatrix& r, const FactorPair& f);

/// Forward-stagewise multi-level factorization of X.
MultiLevelEmbedding boostne(const ConnectivityMatrix& x, const BoostConfig& cfg);
MultiLevelEmbedding boostne(const CsrMatrix& x, const BoostConfig& cfg);

/// One entry per level with the residual it factorized, followed by an entry
/// at level k+1 holding the terminal residual.
std::vector<TraceEntry> residual_trace(const MultiLevelEmbedding& e);

/// Column-concatenates equal-height blocks in order.
DenseMatrix concatenate(std::span<const DenseMatrix> blocks);

/// ||X - sum_i U_i V_i||_F^2 at the returned factors.
double joint_objective(const CsrMatrix& x, const MultiLevelEmbedding& e);

}  // namespace boostne
