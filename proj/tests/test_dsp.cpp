#include <doctest.h>

#include <cmath>
#include <numbers>

#include "breathflow/dsp.hpp"
#include "breathflow/error.hpp"

using namespace breathflow;

namespace {

constexpr double kPi = std::numbers::pi;

Signal sine(double freq, double seconds, double fs, double amp = 1.0, double offset = 0.0) {
  Signal s{{}, fs, 0.0};
  const auto n = static_cast<std::size_t>(std::llround(seconds * fs));
  for (std::size_t i = 0; i < n; ++i) s.samples.push_back(offset + amp * std::sin(2 * kPi * freq * i / fs));
  return s;
}

}  // namespace

TEST_CASE("moving average width rule") {
  CHECK(moving_average_width(0.65, 30.0) == 19);
  CHECK(moving_average_width(0.1, 30.0) == 3);
  CHECK(moving_average_width(0.01, 30.0) == 1);
  CHECK(moving_average_width(1.0, 4.0) % 2 == 1);
  CHECK_THROWS_AS(moving_average_width(0.0, 30.0), ValidationError);
}

TEST_CASE("moving average: constant and impulse") {
  const Signal c{std::vector<double>(50, 4.25), 30.0, 0.0};
  for (double v : moving_average(c, 0.65).samples) CHECK(v == doctest::Approx(4.25));

  Signal impulse{std::vector<double>(9, 0.0), 30.0, 0.0};
  impulse.samples[4] = 1.0;
  const Signal out = moving_average(impulse, 0.1);  // 3 samples
  for (std::size_t i = 0; i < 9; ++i)
    CHECK(out.samples[i] == doctest::Approx(i >= 3 && i <= 5 ? 1.0 / 3.0 : 0.0));
}

TEST_CASE("butterworth magnitude matches the analytic response") {
  for (int order : {1, 2, 3, 4, 5, 6, 8}) {
    for (double fc : {0.496, 1.0, 3.0}) {
      const ButterworthLowpass lp(order, fc, 30.0);
      CHECK(std::abs(lp.magnitude(0.0) - 1.0) <= 1e-9);
      CHECK(std::abs(lp.magnitude(fc) - 1.0 / std::sqrt(2.0)) <= 1e-6);
      // The bilinear transform compresses frequency: compare at the prewarped ratio.
      const double ratio = std::tan(kPi * 2 * fc / 30.0) / std::tan(kPi * fc / 30.0);
      CHECK(std::abs(lp.magnitude(2 * fc) - 1.0 / std::sqrt(1.0 + std::pow(ratio, 2 * order))) <= 1e-9);
    }
  }
  const ButterworthLowpass lp(4, 0.496, 30.0);
  CHECK(std::abs(lp.prototype_magnitude(2.0) - 1.0 / std::sqrt(257.0)) <= 1e-12);
  CHECK(std::abs(lp.magnitude(lp.warped_frequency(2.0)) - 1.0 / std::sqrt(257.0)) <= 1e-9);
  CHECK(lp.warped_frequency(1.0) == doctest::Approx(0.496).epsilon(1e-12));
  CHECK(lp.sections().size() == 2);
}

TEST_CASE("butterworth design rejects cutoffs at or above Nyquist") {
  CHECK_THROWS_AS(ButterworthLowpass(4, 15.0, 30.0), ValidationError);
  CHECK_THROWS_AS(ButterworthLowpass(4, 0.0, 30.0), ValidationError);
  CHECK_THROWS_AS(ButterworthLowpass(0, 1.0, 30.0), ValidationError);
}

TEST_CASE("zero-phase filtering keeps constants and passband phase") {
  const Signal c{std::vector<double>(300, 5.0), 30.0, 0.0};
  for (double v : butterworth_lowpass(c, 0.496, 4).samples) CHECK(std::abs(v - 5.0) <= 1e-6);

  const Signal s = sine(0.1, 60.0, 30.0);
  const Signal f = butterworth_lowpass(s, 0.496, 4);
  // Well inside the passband, away from the ends: no lag and near-unit gain.
  for (std::size_t i = 300; i < s.size() - 300; ++i) CHECK(std::abs(f.samples[i] - s.samples[i]) < 2e-3);

  const Signal hf = sine(3.0, 60.0, 30.0);
  const Signal g = butterworth_lowpass(hf, 0.496, 4);
  for (std::size_t i = 300; i < hf.size() - 300; ++i) CHECK(std::abs(g.samples[i]) < 1e-3);
}

TEST_CASE("polyline interpolation") {
  const Polyline p({{0.0, 0.0}, {2.0, 4.0}, {3.0, 1.0}});
  CHECK(p(-1.0) == 0.0);
  CHECK(p(1.0) == 2.0);
  CHECK(p(2.5) == 2.5);
  CHECK(p(9.0) == 1.0);
  CHECK_THROWS_AS(Polyline({{1.0, 0.0}, {1.0, 1.0}}), ValidationError);
}

TEST_CASE("sliding extrema on a sinusoid sit on crests and troughs") {
  const Signal s = sine(0.25, 20.0, 30.0);  // period 4 s, window 2 s
  const Envelope env = sliding_extrema(s, 2.0);
  std::size_t crests = 0, troughs = 0;
  for (const Vertex& v : env.upper.vertices()) {
    if (v.time > 0.0 && v.time < s.time_at(s.size() - 1)) {
      CHECK(v.value == doctest::Approx(1.0));
      CHECK(std::fmod(v.time, 4.0) == doctest::Approx(1.0));
      ++crests;
    }
  }
  for (const Vertex& v : env.lower.vertices()) {
    if (v.time > 0.0 && v.time < s.time_at(s.size() - 1)) {
      CHECK(v.value == doctest::Approx(-1.0));
      ++troughs;
    }
  }
  CHECK(crests == 5);
  CHECK(troughs == 5);
}

TEST_CASE("sliding extrema of a ramp and a constant") {
  Signal ramp{{}, 10.0, 0.0};
  for (int i = 0; i < 100; ++i) ramp.samples.push_back(i * 0.5);
  const Envelope env = sliding_extrema(ramp, 2.0);
  // Only the endpoints qualify, so both envelopes are the spanning segment.
  REQUIRE(env.upper.vertices().size() == 2);
  REQUIRE(env.lower.vertices().size() == 2);
  CHECK(env.upper(5.0) == doctest::Approx(25.0));
  CHECK(env.lower(5.0) == doctest::Approx(25.0));

  const Signal c{std::vector<double>(40, 3.0), 10.0, 0.0};
  const Envelope ce = sliding_extrema(c, 2.0);
  CHECK(ce.upper.vertices().size() <= 2);
  CHECK(ce.upper(1.7) == 3.0);
  CHECK(ce.lower(1.7) == 3.0);
  for (double v : normalize(c, ce).samples) CHECK(v == 0.5);
}

TEST_CASE("normalize a sinusoid to [0, 1]") {
  const Signal s = sine(0.25, 40.0, 30.0, 2.0, 7.0);
  const Signal n = normalize(s, sliding_extrema(s, 6.0));
  double lo = 1, hi = 0;
  for (double v : n.samples) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo == 0.0);
  CHECK(hi == 1.0);
  CHECK(n.samples[30] == doctest::Approx(1.0));       // crest at t = 1 s
  CHECK(n.samples[3 * 30] == doctest::Approx(0.0));   // trough at t = 3 s
}

TEST_CASE("normalization removes a linear trend") {
  // Slope of half the amplitude per period.
  const double amp = 1.0, period = 4.0, fs = 30.0;
  Signal s{{}, fs, 0.0};
  for (int i = 0; i < 60 * 30; ++i) {
    const double t = i / fs;
    s.samples.push_back(amp * std::sin(2 * kPi * t / period) + 0.5 * amp * t / period);
  }
  const Signal n = normalize(s, sliding_extrema(s, 6.0));
  std::size_t crests = 0;
  for (std::size_t i = 60; i + 60 < n.size(); ++i) {
    const double t = s.time_at(i);
    const double phase = std::fmod(t, period);
    if (std::abs(phase - 1.0) < 0.5 / fs) {
      CHECK(n.samples[i] >= 0.95);
      ++crests;
    }
  }
  CHECK(crests >= 13);
}
