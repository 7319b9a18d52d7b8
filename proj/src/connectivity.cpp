#include "boostne/connectivity.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "boostne/errors.hpp"
#include "boostne/hashing.hpp"
#include "boostne/parallel.hpp"

namespace boostne {

std::string_view to_string(MatrixKind kind) noexcept {
  switch (kind) {
    case MatrixKind::kDeepWalk: return "deepwalk";
    case MatrixKind::kLine: return "line";
    case MatrixKind::kGraRepStep: return "grarep";
  }
  return "unknown";
}

MatrixKind parse_matrix_kind(std::string_view name) {
  if (name == "deepwalk") return MatrixKind::kDeepWalk;
  if (name == "line") return MatrixKind::kLine;
  if (name == "grarep") return MatrixKind::kGraRepStep;
  throw UsageError("unknown matrix kind '" + std::string(name) + "' (expected deepwalk, line or grarep)");
}

void ConnectivityConfig::validate() const {
  if (window < 1) throw UsageError("window size must be >= 1, got " + std::to_string(window));
  if (!(shift > 0.0) || !std::isfinite(shift)) throw UsageError("shift b must be positive and finite");
  if (step < 1) throw UsageError("transition step must be >= 1, got " + std::to_string(step));
}

std::uint64_t ConnectivityMatrix::fingerprint() const noexcept {
  Fingerprint fp;
  fp.value(static_cast<std::uint8_t>(config.kind)).value(config.window).value(config.shift).value(config.step);
  fp.value(graph_fingerprint);
  fp.values(std::span<const std::size_t>(values.row_ptr()));
  fp.values(std::span<const std::uint32_t>(values.col_idx()));
  fp.values(std::span<const double>(values.values()));
  return fp.digest();
}

namespace {

// Applies `entry(i, j, v)` to every positive entry of a dense matrix row-wise
// and keeps results above the storage threshold. Row blocks run in parallel
// and are spliced in order.
template <typename EntryFn>
CsrMatrix sparsify_log_transform(const DenseMatrix& dense, EntryFn entry) {
  const std::size_t n = dense.rows();
  const std::size_t blocks = std::max<std::size_t>(1, std::min(thread_count(), n));
  const std::size_t chunk = (n + blocks - 1) / blocks;
  std::vector<CsrMatrix> parts(blocks);
  parallel_for(0, blocks, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t b = lo; b < hi; ++b) {
      const std::size_t r0 = std::min(n, b * chunk);
      const std::size_t r1 = std::min(n, r0 + chunk);
      CsrBuilder part(r1 - r0, dense.cols());
      for (std::size_t i = r0; i < r1; ++i) {
        const auto row = dense.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
          if (row[j] <= 0.0) continue;
          const double x = entry(i, j, row[j]);
          if (!std::isfinite(x)) throw InternalError("non-finite connectivity entry");
          if (x > kStorageDropThreshold) part.push(static_cast<std::uint32_t>(j), x);
        }
        part.finish_row();
      }
      parts[b] = std::move(part).finish();
    }
  }, 1);
  CsrBuilder builder(n, dense.cols());
  for (const auto& p : parts) builder.append_rows(p);
  return std::move(builder).finish();
}

}  // namespace

ConnectivityMatrix deepwalk_matrix(const Graph& g, int window, double shift, const WalkSumOptions& options) {
  ConnectivityConfig config{MatrixKind::kDeepWalk, window, shift, 1};
  config.validate();
  const DenseMatrix p = walk_sum(g, window, options);
  const double vol = g.volume();
  const auto degree = g.degree();
  ConnectivityMatrix x;
  x.values = sparsify_log_transform(p, [&](std::size_t, std::size_t j, double pij) {
    return std::log(vol * pij / (degree[j] * shift));
  });
  x.config = config;
  x.graph_fingerprint = g.fingerprint();
  return x;
}

ConnectivityMatrix line_matrix(const Graph& g, double shift, const WalkSumOptions& options) {
  ConnectivityMatrix x = deepwalk_matrix(g, 1, shift, options);
  x.config.kind = MatrixKind::kLine;
  return x;
}

ConnectivityMatrix grarep_step_matrix(const Graph& g, int step, double shift, const WalkSumOptions& options) {
  ConnectivityConfig config{MatrixKind::kGraRepStep, 1, shift, step};
  config.validate();
  const DenseMatrix sp = transition_power(g, step, options);
  const std::size_t n = sp.rows();
  std::vector<double> col_sum(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = sp.row(i);
    for (std::size_t j = 0; j < n; ++j) col_sum[j] += row[j];
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!(col_sum[j] > 0.0)) {
      throw DataError("column '" + g.node_id(j) + "' of the " + std::to_string(step) +
                      "-step transition matrix sums to zero");
    }
  }
  ConnectivityMatrix x;
  x.values = sparsify_log_transform(sp, [&](std::size_t, std::size_t j, double sij) {
    return std::log(sij / col_sum[j]) - std::log(shift);
  });
  x.config = config;
  x.graph_fingerprint = g.fingerprint();
  return x;
}

ConnectivityMatrix build_connectivity(const Graph& g, const ConnectivityConfig& config,
                                      const WalkSumOptions& options) {
  config.validate();
  switch (config.kind) {
    case MatrixKind::kDeepWalk: return deepwalk_matrix(g, config.window, config.shift, options);
    case MatrixKind::kLine: return line_matrix(g, config.shift, options);
    case MatrixKind::kGraRepStep: return grarep_step_matrix(g, config.step, config.shift, options);
  }
  throw UsageError("unknown matrix kind");
}

namespace {

constexpr std::array<char, 8> kCacheMagic = {'B', 'N', 'E', 'X', 'C', 'A', 'C', 'H'};
constexpr std::uint32_t kCacheVersion = 1;

static_assert(std::endian::native == std::endian::little, "cache I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw DataError("truncated connectivity cache");
  return v;
}

}  // namespace

void write_connectivity_cache(std::ostream& out, const ConnectivityMatrix& x) {
  out.write(kCacheMagic.data(), kCacheMagic.size());
  put<std::uint32_t>(out, kCacheVersion);
  put<std::uint64_t>(out, x.values.rows());
  put<std::uint8_t>(out, static_cast<std::uint8_t>(x.config.kind));
  put<std::int32_t>(out, x.config.window);
  put<double>(out, x.config.shift);
  put<std::int32_t>(out, x.config.step);
  put<std::uint64_t>(out, x.graph_fingerprint);
  put<std::uint64_t>(out, x.values.nnz());
  for (std::size_t i = 0; i < x.values.rows(); ++i) {
    const auto cols = x.values.row_cols(i);
    const auto vals = x.values.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(i));
      put<std::uint32_t>(out, cols[k]);
      put<double>(out, vals[k]);
    }
  }
  if (!out) throw DataError("failed writing connectivity cache");
}

ConnectivityMatrix read_connectivity_cache(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kCacheMagic) throw DataError("not a connectivity cache");
  if (get<std::uint32_t>(in) != kCacheVersion) throw DataError("unsupported connectivity cache version");
  ConnectivityMatrix x;
  const auto n = get<std::uint64_t>(in);
  const auto kind = get<std::uint8_t>(in);
  if (kind > static_cast<std::uint8_t>(MatrixKind::kGraRepStep)) throw DataError("bad matrix kind in cache");
  x.config.kind = static_cast<MatrixKind>(kind);
  x.config.window = get<std::int32_t>(in);
  x.config.shift = get<double>(in);
  x.config.step = get<std::int32_t>(in);
  x.graph_fingerprint = get<std::uint64_t>(in);
  const auto nnz = get<std::uint64_t>(in);
  std::vector<Triplet> triplets;
  triplets.reserve(nnz);
  for (std::uint64_t k = 0; k < nnz; ++k) {
    Triplet t{};
    t.row = get<std::uint32_t>(in);
    t.col = get<std::uint32_t>(in);
    t.value = get<double>(in);
    if (t.row >= n || t.col >= n) throw DataError("cache entry outside matrix bounds");
    triplets.push_back(t);
  }
  x.values = CsrMatrix::from_triplets(n, n, std::move(triplets));
  return x;
}

}  // namespace boostne
