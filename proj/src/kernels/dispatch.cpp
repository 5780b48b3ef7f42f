#include <cstdlib>
#include <string>

#include "breathflow/error.hpp"
#include "breathflow/kernels.hpp"

namespace breathflow::simd {

#ifndef BREATHFLOW_HAVE_AVX2
namespace detail {
const KernelTable* avx2_table() noexcept { return nullptr; }
}  // namespace detail
#endif

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(__x86_64__) || defined(__i386__)
      return detail::avx2_table() != nullptr && __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_supported(isa))
    throw ValidationError("SIMD variant not available: " + std::string(isa_name(isa)));
  return isa == Isa::avx2 ? *detail::avx2_table() : detail::scalar_table();
}

namespace {

const KernelTable& select() {
  if (const char* env = std::getenv("BREATHFLOW_SIMD")) {
    const std::string_view want(env);
    if (want == "scalar") return detail::scalar_table();
    if (want == "avx2") return kernels_for(Isa::avx2);
  }
  return isa_supported(Isa::avx2) ? *detail::avx2_table() : detail::scalar_table();
}

}  // namespace

const KernelTable& active_kernels() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace breathflow::simd
