#include <immintrin.h>

#include <cassert>

#include "breathflow/kernels.hpp"

// Compiled with -mavx2 but without -mfma: each lane performs exactly the scalar
// sequence acc = acc + tap * x.
namespace breathflow::simd {

namespace {

void correlate(std::span<const float> src, std::span<const float> taps, std::span<float> dst) {
  assert(src.size() == dst.size() + taps.size() - 1);
  const std::size_t n = dst.size();
  const std::size_t ntaps = taps.size();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 acc = _mm256_setzero_ps();
    for (std::size_t k = 0; k < ntaps; ++k) {
      const __m256 t = _mm256_set1_ps(taps[k]);
      acc = _mm256_add_ps(acc, _mm256_mul_ps(t, _mm256_loadu_ps(src.data() + i + k)));
    }
    _mm256_storeu_ps(dst.data() + i, acc);
  }
  for (; i < n; ++i) {
    float acc = 0.0f;
    for (std::size_t k = 0; k < ntaps; ++k) acc = acc + taps[k] * src[i + k];
    dst[i] = acc;
  }
}

void combine_rows(std::span<const float* const> rows, std::span<const float> taps,
                  std::span<float> dst) {
  assert(rows.size() == taps.size());
  const std::size_t n = dst.size();
  const std::size_t ntaps = taps.size();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 acc = _mm256_setzero_ps();
    for (std::size_t k = 0; k < ntaps; ++k) {
      const __m256 t = _mm256_set1_ps(taps[k]);
      acc = _mm256_add_ps(acc, _mm256_mul_ps(t, _mm256_loadu_ps(rows[k] + i)));
    }
    _mm256_storeu_ps(dst.data() + i, acc);
  }
  for (; i < n; ++i) {
    float acc = 0.0f;
    for (std::size_t k = 0; k < ntaps; ++k) acc = acc + taps[k] * rows[k][i];
    dst[i] = acc;
  }
}

void solve2x2(std::span<const float> g11, std::span<const float> g12, std::span<const float> g22,
              std::span<const float> h1, std::span<const float> h2, std::span<float> dx,
              std::span<float> dy) {
  const std::size_t n = dx.size();
  const __m256 reg = _mm256_set1_ps(kDetRegularizer);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 a = _mm256_loadu_ps(g11.data() + i);
    const __m256 b = _mm256_loadu_ps(g12.data() + i);
    const __m256 c = _mm256_loadu_ps(g22.data() + i);
    const __m256 u = _mm256_loadu_ps(h1.data() + i);
    const __m256 v = _mm256_loadu_ps(h2.data() + i);
    const __m256 det = _mm256_add_ps(_mm256_sub_ps(_mm256_mul_ps(a, c), _mm256_mul_ps(b, b)), reg);
    const __m256 nx = _mm256_sub_ps(_mm256_mul_ps(c, u), _mm256_mul_ps(b, v));
    const __m256 ny = _mm256_sub_ps(_mm256_mul_ps(a, v), _mm256_mul_ps(b, u));
    _mm256_storeu_ps(dx.data() + i, _mm256_div_ps(nx, det));
    _mm256_storeu_ps(dy.data() + i, _mm256_div_ps(ny, det));
  }
  for (; i < n; ++i) {
    const float det = (g11[i] * g22[i] - g12[i] * g12[i]) + kDetRegularizer;
    const float nx = g22[i] * h1[i] - g12[i] * h2[i];
    const float ny = g11[i] * h2[i] - g12[i] * h1[i];
    dx[i] = nx / det;
    dy[i] = ny / det;
  }
}

constexpr KernelTable kAvx2{Isa::avx2, &correlate, &combine_rows, &solve2x2};

}  // namespace

namespace detail {
const KernelTable* avx2_table() noexcept { return &kAvx2; }
}  // namespace detail

}  // namespace breathflow::simd
