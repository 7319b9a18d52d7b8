#pragma once

#include <cstdint>

#include "boostne/matrix.hpp"

namespace boostne {

struct NmfConfig {
  int rank = 16;
  int max_iters = 200;
  double rel_tol = 1e-4;
  double epsilon = 1e-12;
  std::uint64_t seed = 42;

  void validate() const;
};

/// Nonnegative factors of R ~ U V.
///
/// `u` is rows(R) x rank (center embedding). The context factor V is
/// rank x cols(R); it is held transposed in `v_t` (cols(R) x rank) so both
/// factors are updated row by row. Use `context()` for V itself.
struct FactorPair {
  DenseMatrix u;
  DenseMatrix v_t;
  double final_objective = 0.0;
  int iterations = 0;
  /// Set when the target was all-zero; both factors are then zero.
  bool degenerate = false;

  std::size_t rank() const noexcept { return u.cols(); }
  DenseMatrix context() const { return v_t.transposed(); }
};

/// U, V i.i.d. uniform on (0, s] with s = sqrt(mean(R) / rank), drawn from a
/// mt19937_64 stream seeded with `cfg.seed` (U row-major first, then V
/// row-major). All-zero R gives zero factors flagged degenerate.
FactorPair init_factors(const CsrMatrix& r, const NmfConfig& cfg);

/// ||R - U V||_F^2 without forming U V:
/// ||R||^2 - 2 sum_{nnz} R_ij (UV)_ij + trace((U^T U)(V V^T)), clamped at 0.
double objective(const CsrMatrix& r, const FactorPair& f);

/// One multiplicative update of U then V:
///   U <- U * (R V^T) / (U V V^T + eps),  V <- V * (U^T R) / (U^T U V + eps).
/// `r_t` must be the transpose of `r`.
void multiplicative_step(const CsrMatrix& r, const CsrMatrix& r_t, FactorPair& f, double epsilon);

/// Convenience overload that transposes `r` itself.
FactorPair multiplicative_step(const CsrMatrix& r, FactorPair f, double epsilon);

/// Runs multiplicative updates from `init_factors` until `max_iters` or until
/// the objective decrease relative to the initial objective drops below
/// `rel_tol`. Cost per iteration is O(nnz(R) * rank + n * rank^2).
FactorPair factorize(const CsrMatrix& r, const NmfConfig& cfg);

}  // namespace boostne
