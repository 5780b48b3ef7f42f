#include <cassert>

#include "breathflow/kernels.hpp"

namespace breathflow::simd {

namespace {

void correlate(std::span<const float> src, std::span<const float> taps, std::span<float> dst) {
  assert(src.size() == dst.size() + taps.size() - 1);
  const std::size_t ntaps = taps.size();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    float acc = 0.0f;
    for (std::size_t k = 0; k < ntaps; ++k) acc = acc + taps[k] * src[i + k];
    dst[i] = acc;
  }
}

void combine_rows(std::span<const float* const> rows, std::span<const float> taps,
                  std::span<float> dst) {
  assert(rows.size() == taps.size());
  for (std::size_t i = 0; i < dst.size(); ++i) {
    float acc = 0.0f;
    for (std::size_t k = 0; k < taps.size(); ++k) acc = acc + taps[k] * rows[k][i];
    dst[i] = acc;
  }
}

void solve2x2(std::span<const float> g11, std::span<const float> g12, std::span<const float> g22,
              std::span<const float> h1, std::span<const float> h2, std::span<float> dx,
              std::span<float> dy) {
  for (std::size_t i = 0; i < dx.size(); ++i) {
    const float det = (g11[i] * g22[i] - g12[i] * g12[i]) + kDetRegularizer;
    const float nx = g22[i] * h1[i] - g12[i] * h2[i];
    const float ny = g11[i] * h2[i] - g12[i] * h1[i];
    dx[i] = nx / det;
    dy[i] = ny / det;
  }
}

constexpr KernelTable kScalar{Isa::scalar, &correlate, &combine_rows, &solve2x2};

}  // namespace

namespace detail {
const KernelTable& scalar_table() noexcept { return kScalar; }
}  // namespace detail

}  // namespace breathflow::simd
