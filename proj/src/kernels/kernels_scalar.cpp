#include "boostne/kernels.hpp"

namespace boostne::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void mul_div_scalar(double* x, const double* num, const double* den, double eps, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = (x[i] * num[i]) / (den[i] + eps);
}

void scale_scalar(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

}  // namespace

const KernelTable& scalar_table() noexcept {
  static const KernelTable table{Isa::kScalar, "scalar", dot_scalar, axpy_scalar, mul_div_scalar,
                                 scale_scalar};
  return table;
}

}  // namespace boostne::kernels
