#include <atomic>
#include <cstdlib>
#include <string_view>

#include "boostne/kernels.hpp"

namespace boostne::kernels {

#if defined(BOOSTNE_HAVE_AVX2)
const KernelTable& avx2_table_unchecked() noexcept;
#endif

const KernelTable* avx2_table() noexcept {
#if defined(BOOSTNE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return supported ? &avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable* initial_table() noexcept {
  const char* env = std::getenv("BOOSTNE_KERNELS");
  const std::string_view want = env ? env : "auto";
  if (want == "scalar") return &scalar_table();
  if (const auto* avx2 = avx2_table()) return avx2;
  return &scalar_table();
}

std::atomic<const KernelTable*>& slot() noexcept {
  static std::atomic<const KernelTable*> current{initial_table()};
  return current;
}

}  // namespace

const KernelTable& active() noexcept { return *slot().load(std::memory_order_relaxed); }

bool select(Isa isa) noexcept {
  const KernelTable* table = isa == Isa::kScalar ? &scalar_table() : avx2_table();
  if (table == nullptr) return false;
  slot().store(table, std::memory_order_relaxed);
  return true;
}

}  // namespace boostne::kernels
