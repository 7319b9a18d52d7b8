#pragma once

// Data-parallel inner loops shared by the walk-sum, NMF and residual code.
//
// Every kernel has a scalar reference implementation and, on x86-64 builds, an
// AVX2/FMA variant. The active table is picked once at first use from the CPU
// features, and can be pinned with BOOSTNE_KERNELS=scalar|avx2. Scalar and AVX2
// results agree to rounding (dot/axpy use a different summation order and
// FMA); the multiplicative update kernel is bit-identical across variants.

#include <cstddef>
#include <span>
#include <string_view>

namespace boostne::kernels {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  Isa isa;
  std::string_view name;
  /// sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  /// y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  /// x[i] = (x[i] * num[i]) / (den[i] + eps)
  void (*mul_div)(double* x, const double* num, const double* den, double eps, std::size_t n);
  /// x[i] *= a
  void (*scale)(double a, double* x, std::size_t n);
};

const KernelTable& scalar_table() noexcept;
/// nullptr when the build has no AVX2 variant or the CPU lacks AVX2+FMA.
const KernelTable* avx2_table() noexcept;

/// Currently active table.
const KernelTable& active() noexcept;
/// Pins the active table; returns false (and changes nothing) when `isa` is
/// unavailable. Not thread-safe with concurrent kernel calls.
bool select(Isa isa) noexcept;

inline double dot(std::span<const double> x, std::span<const double> y) noexcept {
  return active().dot(x.data(), y.data(), x.size());
}
inline void axpy(double a, std::span<const double> x, std::span<double> y) noexcept {
  active().axpy(a, x.data(), y.data(), x.size());
}
inline void mul_div(std::span<double> x, std::span<const double> num, std::span<const double> den,
                    double eps) noexcept {
  active().mul_div(x.data(), num.data(), den.data(), eps, x.size());
}
inline void scale(double a, std::span<double> x) noexcept { active().scale(a, x.data(), x.size()); }

}  // namespace boostne::kernels
