#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "boostne/graph.hpp"
#include "boostne/matrix.hpp"

namespace boostne {

enum class MatrixKind : std::uint8_t {
  kDeepWalk = 0,
  kLine = 1,
  kGraRepStep = 2,
};

std::string_view to_string(MatrixKind kind) noexcept;
/// Accepts "deepwalk", "line", "grarep". Throws UsageError otherwise.
MatrixKind parse_matrix_kind(std::string_view name);

struct ConnectivityConfig {
  MatrixKind kind = MatrixKind::kDeepWalk;
  int window = 10;     // context window T (DeepWalk)
  double shift = 5.0;  // log shift b, the negative-sample count for DeepWalk/LINE
  int step = 1;        // transition step p (GraRep)

  /// Throws UsageError on T < 1, b <= 0 (or non-finite), p < 1.
  void validate() const;
};

/// The nonnegative sparse target X together with how it was built.
struct ConnectivityMatrix {
  CsrMatrix values;
  ConnectivityConfig config;
  std::uint64_t graph_fingerprint = 0;

  std::size_t size() const noexcept { return values.rows(); }
  std::uint64_t fingerprint() const noexcept;
};

/// Entries that clip to at or below this value are not stored.
inline constexpr double kStorageDropThreshold = 1e-12;

/// X_ij = max(log(vol(G) * P_ij / (d_j * b)), 0) with P the T-step walk sum.
/// Zero walk probabilities map to exact zeros.
ConnectivityMatrix deepwalk_matrix(const Graph& g, int window, double shift, const WalkSumOptions& options = {});

/// DeepWalk with a one-step window.
ConnectivityMatrix line_matrix(const Graph& g, double shift, const WalkSumOptions& options = {});

/// X_ij = max(log(S^p_ij / sum_t S^p_tj) - log(b), 0).
/// Throws DataError naming any column of S^p that sums to zero.
ConnectivityMatrix grarep_step_matrix(const Graph& g, int step, double shift, const WalkSumOptions& options = {});

ConnectivityMatrix build_connectivity(const Graph& g, const ConnectivityConfig& config,
                                      const WalkSumOptions& options = {});

// Binary cache: little-endian header followed by (u32 row, u32 col, f64 value)
// triplets in row-major order.
void write_connectivity_cache(std::ostream& out, const ConnectivityMatrix& x);
ConnectivityMatrix read_connectivity_cache(std::istream& in);

}  // namespace boostne
