#include "boostne/nmf.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "boostne/errors.hpp"
#include "boostne/kernels.hpp"
#include "boostne/parallel.hpp"

namespace boostne {

void NmfConfig::validate() const {
  if (rank < 1) throw UsageError("NMF rank must be >= 1, got " + std::to_string(rank));
  if (max_iters < 1) throw UsageError("NMF max_iters must be >= 1");
  if (!(rel_tol > 0.0)) throw UsageError("NMF rel_tol must be > 0");
  if (!(epsilon > 0.0)) throw UsageError("NMF epsilon must be > 0");
}

namespace {

// Fixed block size keeps the reduction order independent of the thread count.
constexpr std::size_t kReduceBlock = 256;

/// M^T M for a tall n x r matrix, summed over fixed row blocks in order.
DenseMatrix gram(const DenseMatrix& m) {
  const std::size_t n = m.rows();
  const std::size_t r = m.cols();
  const std::size_t blocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<DenseMatrix> partial(blocks, DenseMatrix(r, r));
  parallel_for(0, blocks, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t b = lo; b < hi; ++b) {
      auto& g = partial[b];
      const std::size_t end = std::min(n, (b + 1) * kReduceBlock);
      for (std::size_t i = b * kReduceBlock; i < end; ++i) {
        const auto row = m.row(i);
        for (std::size_t l = 0; l < r; ++l) {
          if (row[l] != 0.0) kernels::axpy(row[l], row, g.row(l));
        }
      }
    }
  }, 1);
  DenseMatrix out(r, r);
  for (const auto& g : partial) kernels::axpy(1.0, g.values(), out.values());
  return out;
}

double trace_product(const DenseMatrix& a, const DenseMatrix& b) {
  // Both arguments are symmetric Gram matrices, so trace(AB) = sum_ij A_ij B_ij.
  return kernels::dot(a.values(), b.values());
}

double ordered_sum(const std::vector<double>& parts) {
  double s = 0.0;
  for (const double p : parts) s += p;
  return s;
}

/// Sum over stored (i,j) of R_ij * <left_i, right_j>, reduced in fixed blocks.
double sparse_cross_term(const CsrMatrix& r, const DenseMatrix& left, const DenseMatrix& right) {
  const std::size_t n = r.rows();
  const std::size_t blocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> partial(blocks, 0.0);
  parallel_for(0, blocks, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t b = lo; b < hi; ++b) {
      double s = 0.0;
      const std::size_t end = std::min(n, (b + 1) * kReduceBlock);
      for (std::size_t i = b * kReduceBlock; i < end; ++i) {
        const auto cols = r.row_cols(i);
        const auto vals = r.row_values(i);
        const auto li = left.row(i);
        for (std::size_t k = 0; k < cols.size(); ++k) s += vals[k] * kernels::dot(li, right.row(cols[k]));
      }
      partial[b] = s;
    }
  }, 1);
  return ordered_sum(partial);
}

/// One half-step: rows of `target` (n x r) are updated against the sparse
/// operator `op` (n x m) and the fixed factor `fixed` (m x r) with Gram
/// `fixed_gram`. Numerators are written to `numerators` when non-null.
void update_rows(const CsrMatrix& op, const DenseMatrix& fixed, const DenseMatrix& fixed_gram, DenseMatrix& target,
                 double epsilon, DenseMatrix* numerators) {
  const std::size_t r = target.cols();
  parallel_for(0, target.rows(), [&](std::size_t lo, std::size_t hi) {
    std::vector<double> num(r), den(r);
    for (std::size_t i = lo; i < hi; ++i) {
      std::fill(num.begin(), num.end(), 0.0);
      std::fill(den.begin(), den.end(), 0.0);
      const auto cols = op.row_cols(i);
      const auto vals = op.row_values(i);
      for (std::size_t k = 0; k < cols.size(); ++k) kernels::axpy(vals[k], fixed.row(cols[k]), num);
      auto row = target.row(i);
      for (std::size_t m = 0; m < r; ++m) {
        if (row[m] != 0.0) kernels::axpy(row[m], fixed_gram.row(m), den);
      }
      if (numerators) std::copy(num.begin(), num.end(), numerators->row(i).begin());
      kernels::mul_div(row, num, den, epsilon);
    }
  }, 32);
}

struct StepState {
  DenseMatrix gram_v;
  DenseMatrix gram_u;
  DenseMatrix v_num;
  bool gram_v_valid = false;
};

/// Performs one update and returns the objective at the new factors, computed
/// from quantities the update already produced.
double step_with_objective(const CsrMatrix& r, const CsrMatrix& r_t, double r_norm_sq, FactorPair& f,
                           double epsilon, StepState& state) {
  if (!state.gram_v_valid) state.gram_v = gram(f.v_t);
  update_rows(r, f.v_t, state.gram_v, f.u, epsilon, nullptr);
  state.gram_u = gram(f.u);
  if (state.v_num.rows() != f.v_t.rows() || state.v_num.cols() != f.v_t.cols()) {
    state.v_num = DenseMatrix(f.v_t.rows(), f.v_t.cols());
  }
  update_rows(r_t, f.u, state.gram_u, f.v_t, epsilon, &state.v_num);
  state.gram_v = gram(f.v_t);
  state.gram_v_valid = true;

  // <R, U'V'> = sum_j <V'_j, (R^T U')_j>, and (R^T U') is the V numerator.
  const std::size_t n = f.v_t.rows();
  const std::size_t blocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> partial(blocks, 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t end = std::min(n, (b + 1) * kReduceBlock);
    double s = 0.0;
    for (std::size_t j = b * kReduceBlock; j < end; ++j) s += kernels::dot(f.v_t.row(j), state.v_num.row(j));
    partial[b] = s;
  }
  const double cross = ordered_sum(partial);
  const double value = std::max(0.0, r_norm_sq - 2.0 * cross + trace_product(state.gram_u, state.gram_v));
  if (!std::isfinite(value)) throw InternalError("non-finite NMF objective");
  return value;
}

void check_shapes(const CsrMatrix& r, const FactorPair& f) {
  if (f.u.rows() != r.rows() || f.v_t.rows() != r.cols() || f.u.cols() != f.v_t.cols()) {
    throw UsageError("factor shapes do not match the target matrix");
  }
}

}  // namespace

FactorPair init_factors(const CsrMatrix& r, const NmfConfig& cfg) {
  cfg.validate();
  FactorPair f;
  const auto rank = static_cast<std::size_t>(cfg.rank);
  f.u = DenseMatrix(r.rows(), rank);
  f.v_t = DenseMatrix(r.cols(), rank);
  const double total = r.sum();
  if (r.nnz() == 0 || !(total > 0.0)) {
    f.degenerate = true;
    return f;
  }
  const double mean = total / (static_cast<double>(r.rows()) * static_cast<double>(r.cols()));
  const double scale = std::sqrt(mean / static_cast<double>(rank));
  std::mt19937_64 rng(cfg.seed);
  // (0, scale]: 1 - u with u uniform on [0, 1) at 53-bit resolution.
  auto draw = [&] { return scale * (1.0 - static_cast<double>(rng() >> 11) * 0x1.0p-53); };
  for (double& v : f.u.values()) v = draw();
  for (std::size_t l = 0; l < rank; ++l) {
    for (std::size_t j = 0; j < r.cols(); ++j) f.v_t(j, l) = draw();
  }
  return f;
}

double objective(const CsrMatrix& r, const FactorPair& f) {
  check_shapes(r, f);
  const double cross = sparse_cross_term(r, f.u, f.v_t);
  const double uv = trace_product(gram(f.u), gram(f.v_t));
  return std::max(0.0, r.frobenius_norm_squared() - 2.0 * cross + uv);
}

void multiplicative_step(const CsrMatrix& r, const CsrMatrix& r_t, FactorPair& f, double epsilon) {
  check_shapes(r, f);
  if (!(epsilon > 0.0)) throw UsageError("epsilon must be > 0");
  StepState state;
  step_with_objective(r, r_t, r.frobenius_norm_squared(), f, epsilon, state);
}

FactorPair multiplicative_step(const CsrMatrix& r, FactorPair f, double epsilon) {
  multiplicative_step(r, r.transposed(), f, epsilon);
  return f;
}

FactorPair factorize(const CsrMatrix& r, const NmfConfig& cfg) {
  cfg.validate();
  if (static_cast<std::size_t>(cfg.rank) > std::min(r.rows(), r.cols())) {
    throw UsageError("NMF rank " + std::to_string(cfg.rank) + " exceeds matrix dimension");
  }
  FactorPair f = init_factors(r, cfg);
  if (f.degenerate) return f;

  const CsrMatrix r_t = r.transposed();
  const double r_norm_sq = r.frobenius_norm_squared();
  const double initial = objective(r, f);
  const double denom = std::max(initial, cfg.epsilon);
  StepState state;
  double previous = initial;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    const double current = step_with_objective(r, r_t, r_norm_sq, f, cfg.epsilon, state);
    f.iterations = it;
    f.final_objective = current;
    if ((previous - current) / denom < cfg.rel_tol) break;
    previous = current;
  }
  return f;
}

}  // namespace boostne
