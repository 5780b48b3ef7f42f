#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace breathflow {

/// Uniformly sampled real time series.
struct Signal {
  std::vector<double> samples;
  double sample_rate = 1.0;  // Hz
  double t0 = 0.0;           // seconds, time of samples[0]

  std::size_t size() const noexcept { return samples.size(); }
  double time_at(std::size_t i) const noexcept { return t0 + static_cast<double>(i) / sample_rate; }
  double duration_s() const noexcept { return static_cast<double>(samples.size()) / sample_rate; }
  void validate() const;  // sample_rate > 0, samples finite
};

/// Window length in samples: the odd integer nearest width_s * sample_rate, at least 1.
std::size_t moving_average_width(double width_s, double sample_rate);

/// Centered moving average; windows shrink at the edges.
Signal moving_average(const Signal& signal, double width_s);

/// One biquad in direct form II transposed, a0 == 1.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
};

/// Digital Butterworth lowpass from the analog prototype via the bilinear
/// transform with prewarping, as a cascade of second-order sections.
class ButterworthLowpass {
 public:
  ButterworthLowpass(int order, double cutoff_hz, double sample_rate);

  int order() const noexcept { return order_; }
  double cutoff_hz() const noexcept { return cutoff_hz_; }
  double sample_rate() const noexcept { return sample_rate_; }
  const std::vector<Biquad>& sections() const noexcept { return sections_; }

  /// Single-pass frequency response H(e^{j 2 pi f / fs}).
  std::complex<double> response(double frequency_hz) const;
  double magnitude(double frequency_hz) const { return std::abs(response(frequency_hz)); }
  /// |H(j w)| of the analog prototype the sections were mapped from, at w equal to
  /// `ratio` times its (prewarped) cutoff. Evaluated from the prototype poles.
  double prototype_magnitude(double ratio) const;
  /// Digital frequency the bilinear transform maps the prototype's ratio * cutoff to.
  double warped_frequency(double ratio) const;

  /// Causal single pass, starting from the steady state of `initial`.
  std::vector<double> filter(const std::vector<double>& x, double initial) const;

  /// Zero-phase forward-backward filtering with odd-reflection padding of
  /// 3 * order samples at each end.
  std::vector<double> filtfilt(const std::vector<double>& x) const;

 private:
  int order_;
  double cutoff_hz_;
  double sample_rate_;
  double warped_cutoff_ = 0.0;  // rad/s
  std::vector<std::complex<double>> poles_;
  std::vector<Biquad> sections_;
};

Signal butterworth_lowpass(const Signal& signal, double cutoff_hz, int order);

struct Vertex {
  double time = 0.0;
  double value = 0.0;
  friend bool operator==(const Vertex&, const Vertex&) = default;
};

/// Piecewise-linear curve, constant beyond its end vertices.
class Polyline {
 public:
  Polyline() = default;
  explicit Polyline(std::vector<Vertex> vertices);  // times strictly increasing

  const std::vector<Vertex>& vertices() const noexcept { return vertices_; }
  bool empty() const noexcept { return vertices_.empty(); }
  double operator()(double t) const;

 private:
  std::vector<Vertex> vertices_;
};

struct Envelope {
  Polyline upper;
  Polyline lower;
};

/// Envelope through the samples that are the (first) maximum, respectively minimum,
/// of their centered window of round(window_s * sample_rate) samples, held constant
/// beyond the outermost vertex. Without any interior extremum the envelope is the
/// straight segment through the first and last samples.
Envelope sliding_extrema(const Signal& signal, double window_s);

inline constexpr double kEnvelopeEpsilon = 1e-9;

/// (s - lower) / (upper - lower) clamped to [0, 1]; 0.5 where the envelope collapses.
Signal normalize(const Signal& signal, const Envelope& envelope);

}  // namespace breathflow
