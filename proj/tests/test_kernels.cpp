#include <doctest.h>

#include <cstring>
#include <random>

#include "breathflow/error.hpp"
#include "breathflow/kernels.hpp"
#include "breathflow/optflow.hpp"
#include "breathflow/parallel.hpp"
#include "support.hpp"

using namespace breathflow;

namespace {

std::vector<float> random_floats(std::size_t n, std::mt19937& rng, float lo = -100.0f, float hi = 100.0f) {
  std::uniform_real_distribution<float> u(lo, hi);
  std::vector<float> v(n);
  for (float& x : v) x = u(rng);
  return v;
}

bool same_bits(std::span<const float> a, std::span<const float> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

bool have_avx2() { return simd::isa_supported(simd::Isa::avx2); }

}  // namespace

TEST_CASE("scalar kernels follow their definitions") {
  const auto& k = simd::kernels_for(simd::Isa::scalar);
  const std::vector<float> src{1, 2, 3, 4, 5};
  const std::vector<float> taps{0.5f, 1.0f, -1.0f};
  std::vector<float> dst(3);
  k.correlate(src, taps, dst);
  CHECK(dst == std::vector<float>{-0.5f, 0.0f, 0.5f});

  const std::vector<float> r0{1, 2}, r1{10, 20};
  const std::vector<const float*> rows{r0.data(), r1.data()};
  std::vector<float> out(2);
  k.combine_rows(rows, std::vector<float>{2.0f, 0.5f}, out);
  CHECK(out == std::vector<float>{7.0f, 14.0f});

  std::vector<float> dx(1), dy(1);
  k.solve2x2(std::vector<float>{2}, std::vector<float>{0}, std::vector<float>{4},
             std::vector<float>{2}, std::vector<float>{8}, dx, dy);
  CHECK(dx[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(dy[0] == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("forced ISA override and unsupported requests") {
  CHECK(simd::kernels_for(simd::Isa::scalar).isa == simd::Isa::scalar);
  CHECK(simd::isa_name(simd::Isa::avx2) == "avx2");
  if (!have_avx2()) CHECK_THROWS_AS(simd::kernels_for(simd::Isa::avx2), ValidationError);
}

TEST_CASE("avx2 kernels are bit-identical to scalar") {
  if (!have_avx2()) {
    MESSAGE("avx2 not available on this CPU; skipped");
    return;
  }
  const auto& s = simd::kernels_for(simd::Isa::scalar);
  const auto& v = simd::kernels_for(simd::Isa::avx2);
  std::mt19937 rng(7);
  for (std::size_t n : {1u, 7u, 8u, 9u, 15u, 16u, 33u, 160u, 161u}) {
    for (std::size_t nt : {1u, 3u, 11u, 15u}) {
      const auto src = random_floats(n + nt - 1, rng);
      const auto taps = random_floats(nt, rng, -1.0f, 1.0f);
      std::vector<float> a(n), b(n);
      s.correlate(src, taps, a);
      v.correlate(src, taps, b);
      CHECK(same_bits(a, b));

      std::vector<std::vector<float>> rows;
      std::vector<const float*> ptrs;
      for (std::size_t k = 0; k < nt; ++k) rows.push_back(random_floats(n, rng));
      for (const auto& r : rows) ptrs.push_back(r.data());
      s.combine_rows(ptrs, taps, a);
      v.combine_rows(ptrs, taps, b);
      CHECK(same_bits(a, b));
    }
    const auto g11 = random_floats(n, rng, 0.0f, 50.0f), g22 = random_floats(n, rng, 0.0f, 50.0f);
    const auto g12 = random_floats(n, rng, -20.0f, 20.0f);
    const auto h1 = random_floats(n, rng), h2 = random_floats(n, rng);
    std::vector<float> ax(n), ay(n), bx(n), by(n);
    s.solve2x2(g11, g12, g22, h1, h2, ax, ay);
    v.solve2x2(g11, g12, g22, h1, h2, bx, by);
    CHECK(same_bits(ax, bx));
    CHECK(same_bits(ay, by));
  }
}

TEST_CASE("flow is identical across kernel tables and worker counts") {
  const ImagePlane tex = testing::smooth_texture(96, 72, 11);
  const Frame a = testing::shifted_frame(tex, 0.0, 0.0);
  const Frame b = testing::shifted_frame(tex, 0.3, 0.8);

  WorkerPool one(1), four(4);
  const FlowField ref = FlowEstimator({}, {&simd::kernels_for(simd::Isa::scalar), &one}).estimate(a, b);
  CHECK(FlowEstimator({}, {&simd::kernels_for(simd::Isa::scalar), &four}).estimate(a, b) == ref);
  if (have_avx2()) {
    CHECK(FlowEstimator({}, {&simd::kernels_for(simd::Isa::avx2), &one}).estimate(a, b) == ref);
    CHECK(FlowEstimator({}, {&simd::kernels_for(simd::Isa::avx2), &four}).estimate(a, b) == ref);
  }
}

TEST_CASE("worker pool covers every index once and propagates exceptions") {
  WorkerPool pool(5);
  std::vector<int> hits(1003, 0);
  pool.parallel_for(hits.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) ++hits[i];
  });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(pool.parallel_for(100,
                                    [](std::size_t b, std::size_t) {
                                      if (b > 0) throw std::runtime_error("boom");
                                    }),
                  std::runtime_error);
  pool.parallel_for(3, [](std::size_t, std::size_t) {});
}
