#include <cstdlib>
#include <string>

#include "sald/kernels.hpp"

namespace sald::kernels {

#if defined(SALD_HAVE_AVX2)
const KernelTable& avx2_table_unchecked();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(SALD_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& resolve() {
  const char* forced = std::getenv("SALD_SIMD");
  const std::string choice = forced ? forced : "";
  if (choice == "scalar") return scalar_table();
  if (const KernelTable* t = avx2_table()) return *t;
  return scalar_table();
}

}  // namespace

const KernelTable* avx2_table() {
#if defined(SALD_HAVE_AVX2)
  static const bool supported = cpu_has_avx2();
  if (supported) return &avx2_table_unchecked();
#endif
  return nullptr;
}

const KernelTable& active() {
  static const KernelTable& table = resolve();
  return table;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

}  // namespace sald::kernels
