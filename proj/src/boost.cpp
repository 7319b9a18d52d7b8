#include "boostne/boost.hpp"

#include <string>

#include "boostne/errors.hpp"
#include "boostne/kernels.hpp"
#include "boostne/parallel.hpp"

namespace boostne {

void BoostConfig::validate(std::size_t num_nodes) const {
  if (levels < 1) throw UsageError("number of levels must be >= 1, got " + std::to_string(levels));
  if (level_rank < 1) throw UsageError("per-level rank must be >= 1, got " + std::to_string(level_rank));
  if (static_cast<std::size_t>(level_rank) > num_nodes) {
    throw UsageError("per-level rank " + std::to_string(level_rank) + " exceeds node count " +
                     std::to_string(num_nodes));
  }
  if (!allow_wide && static_cast<std::size_t>(dimension()) >= num_nodes) {
    throw UsageError("embedding dimension " + std::to_string(dimension()) + " must be below the node count " +
                     std::to_string(num_nodes) + " (override with allow_wide)");
  }
  NmfConfig probe = nmf;
  probe.rank = level_rank;
  probe.validate();
}

NmfConfig BoostConfig::level_config(int level_index) const {
  NmfConfig cfg = nmf;
  cfg.rank = level_rank;
  cfg.seed = seed + static_cast<std::uint64_t>(level_index);
  return cfg;
}

CsrMatrix residual(const CsrMatrix& r, const FactorPair& f) {
  if (f.u.rows() != r.rows() || f.v_t.rows() != r.cols() || f.u.cols() != f.v_t.cols()) {
    throw UsageError("factor shapes do not match the residual matrix");
  }
  std::vector<double> next(r.nnz(), 0.0);
  parallel_for(0, r.rows(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const auto cols = r.row_cols(i);
      const auto vals = r.row_values(i);
      const auto ui = f.u.row(i);
      const std::size_t base = r.row_ptr()[i];
      for (std::size_t k = 0; k < cols.size(); ++k) {
        next[base + k] = vals[k] - kernels::dot(ui, f.v_t.row(cols[k]));
      }
    }
  }, 32);

  CsrBuilder builder(r.rows(), r.cols(), r.nnz());
  for (std::size_t i = 0; i < r.rows(); ++i) {
    const auto cols = r.row_cols(i);
    const std::size_t base = r.row_ptr()[i];
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (next[base + k] > kStorageDropThreshold) builder.push(cols[k], next[base + k]);
    }
    builder.finish_row();
  }
  return std::move(builder).finish();
}

MultiLevelEmbedding boostne(const CsrMatrix& x, const BoostConfig& cfg) {
  if (x.rows() != x.cols()) throw UsageError("connectivity matrix must be square");
  cfg.validate(x.rows());
  for (const double v : x.values()) {
    if (!(v >= 0.0)) throw DataError("connectivity matrix has a negative or NaN entry");
  }

  MultiLevelEmbedding out;
  out.config = cfg;
  out.levels.reserve(static_cast<std::size_t>(cfg.levels));

  CsrMatrix r = x;
  for (int i = 0; i < cfg.levels; ++i) {
    LevelFactor level;
    level.level = i + 1;
    level.residual_norm_before = r.frobenius_norm();
    level.residual_nnz_before = r.nnz();
    if (r.nnz() == 0) {
      if (out.warnings.empty()) {
        out.warnings.push_back("residual vanished before level " + std::to_string(i + 1) +
                               "; remaining levels are zero blocks");
      }
      level.factors = init_factors(r, cfg.level_config(i));
    } else {
      level.factors = factorize(r, cfg.level_config(i));
      r = residual(r, level.factors);
    }
    out.levels.push_back(std::move(level));
  }
  out.terminal_norm = r.frobenius_norm();
  out.terminal_nnz = r.nnz();

  std::vector<DenseMatrix> blocks;
  blocks.reserve(out.levels.size());
  for (const auto& level : out.levels) blocks.push_back(level.factors.u);
  out.embedding = concatenate(blocks);
  return out;
}

MultiLevelEmbedding boostne(const ConnectivityMatrix& x, const BoostConfig& cfg) {
  MultiLevelEmbedding e = boostne(x.values, cfg);
  e.connectivity_fingerprint = x.fingerprint();
  return e;
}

std::vector<TraceEntry> residual_trace(const MultiLevelEmbedding& e) {
  std::vector<TraceEntry> trace;
  trace.reserve(e.levels.size() + 1);
  for (const auto& level : e.levels) {
    trace.push_back({level.level, level.residual_norm_before, level.residual_nnz_before});
  }
  trace.push_back({static_cast<int>(e.levels.size()) + 1, e.terminal_norm, e.terminal_nnz});
  return trace;
}

DenseMatrix concatenate(std::span<const DenseMatrix> blocks) {
  if (blocks.empty()) return {};
  const std::size_t n = blocks.front().rows();
  std::size_t total = 0;
  for (const auto& b : blocks) {
    if (b.rows() != n) throw UsageError("cannot concatenate blocks with different row counts");
    total += b.cols();
  }
  DenseMatrix out(n, total);
  for (std::size_t i = 0; i < n; ++i) {
    auto dst = out.row(i).begin();
    for (const auto& b : blocks) dst = std::copy(b.row(i).begin(), b.row(i).end(), dst);
  }
  return out;
}

double joint_objective(const CsrMatrix& x, const MultiLevelEmbedding& e) {
  // sum_i U_i V_i = [U_1 ... U_k] [V_1; ...; V_k]
  FactorPair stacked;
  stacked.u = e.embedding;
  std::vector<DenseMatrix> contexts;
  contexts.reserve(e.levels.size());
  for (const auto& level : e.levels) contexts.push_back(level.factors.v_t);
  stacked.v_t = concatenate(contexts);
  return objective(x, stacked);
}

}  // namespace boostne
