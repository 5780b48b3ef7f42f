#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Inner loops of the flow estimator. Every variant must produce bit-identical
// results to the scalar reference: same operation order per output element, no
// fused multiply-add.
namespace breathflow::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;

struct KernelTable {
  Isa isa;

  // dst[i] = sum_k taps[k] * src[i + k], k ascending.
  // Requires src.size() == dst.size() + taps.size() - 1.
  void (*correlate)(std::span<const float> src, std::span<const float> taps, std::span<float> dst);

  // dst[i] = sum_k taps[k] * rows[k][i], k ascending. Each row holds dst.size() values.
  void (*combine_rows)(std::span<const float* const> rows, std::span<const float> taps,
                       std::span<float> dst);

  // Per element, solves [g11 g12; g12 g22] d = h with the determinant regularized by
  // kDetRegularizer. All spans have equal length.
  void (*solve2x2)(std::span<const float> g11, std::span<const float> g12,
                   std::span<const float> g22, std::span<const float> h1,
                   std::span<const float> h2, std::span<float> dx, std::span<float> dy);
};

inline constexpr float kDetRegularizer = 1e-3f;

bool isa_supported(Isa isa) noexcept;

// Throws ValidationError for an unsupported ISA.
const KernelTable& kernels_for(Isa isa);

// Best supported ISA, overridable with BREATHFLOW_SIMD=scalar|avx2.
const KernelTable& active_kernels();

namespace detail {
const KernelTable& scalar_table() noexcept;
const KernelTable* avx2_table() noexcept;  // nullptr when not compiled in
}  // namespace detail

}  // namespace breathflow::simd
