#include "breathflow/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

#include "breathflow/error.hpp"

namespace breathflow {

void Signal::validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate))
    throw ValidationError("sample rate must be positive");
  for (double v : samples) {
    if (!std::isfinite(v)) throw ValidationError("signal contains non-finite samples");
  }
}

std::size_t moving_average_width(double width_s, double sample_rate) {
  if (!(width_s > 0.0)) throw ValidationError("moving average width must be positive");
  const double len = width_s * sample_rate;
  const double k = std::round((len - 1.0) / 2.0);
  return k < 0.0 ? 1 : static_cast<std::size_t>(2.0 * k + 1.0);
}

Signal moving_average(const Signal& signal, double width_s) {
  const std::size_t w = moving_average_width(width_s, signal.sample_rate);
  const std::size_t half = w / 2;
  const std::size_t n = signal.size();
  Signal out{std::vector<double>(n), signal.sample_rate, signal.t0};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    double sum = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) sum += signal.samples[j];
    out.samples[i] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

ButterworthLowpass::ButterworthLowpass(int order, double cutoff_hz, double sample_rate)
    : order_(order), cutoff_hz_(cutoff_hz), sample_rate_(sample_rate) {
  if (order < 1) throw ValidationError("Butterworth order must be >= 1");
  if (!(sample_rate > 0.0)) throw ValidationError("sample rate must be positive");
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < sample_rate / 2.0)) {
    throw ValidationError("cutoff " + std::to_string(cutoff_hz) +
                          " Hz must lie strictly between 0 and Nyquist (" +
                          std::to_string(sample_rate / 2.0) + " Hz)");
  }
  using cd = std::complex<double>;
  const double fs2 = 2.0 * sample_rate;
  const double warped = fs2 * std::tan(std::numbers::pi * cutoff_hz / sample_rate);
  warped_cutoff_ = warped;
  for (int k = 0; k < order; ++k)
    poles_.push_back(warped * std::polar(1.0, std::numbers::pi * (2.0 * k + order + 1.0) / (2.0 * order)));
  const auto bilinear = [fs2](cd s) { return (fs2 + s) / (fs2 - s); };

  for (int k = 0; k < order / 2; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + order + 1.0) / (2.0 * order);
    const cd z = bilinear(warped * std::polar(1.0, theta));
    Biquad s;
    s.a1 = -2.0 * z.real();
    s.a2 = std::norm(z);
    const double gain = (1.0 + s.a1 + s.a2) / 4.0;  // unity at DC, zeros at z = -1
    s.b0 = gain;
    s.b1 = 2.0 * gain;
    s.b2 = gain;
    sections_.push_back(s);
  }
  if (order % 2 == 1) {
    const double z = bilinear(cd(-warped, 0.0)).real();
    Biquad s;
    s.a1 = -z;
    const double gain = (1.0 - z) / 2.0;
    s.b0 = gain;
    s.b1 = gain;
    sections_.push_back(s);
  }
}

std::complex<double> ButterworthLowpass::response(double frequency_hz) const {
  const std::complex<double> zi =
      std::polar(1.0, -2.0 * std::numbers::pi * frequency_hz / sample_rate_);  // z^-1
  std::complex<double> h(1.0, 0.0);
  for (const Biquad& s : sections_) {
    const auto num = s.b0 + zi * (s.b1 + zi * s.b2);
    const auto den = 1.0 + zi * (s.a1 + zi * s.a2);
    h *= num / den;
  }
  return h;
}

double ButterworthLowpass::prototype_magnitude(double ratio) const {
  const std::complex<double> s(0.0, ratio * warped_cutoff_);
  std::complex<double> h(1.0, 0.0);
  for (const auto& p : poles_) h *= -p / (s - p);
  return std::abs(h);
}

double ButterworthLowpass::warped_frequency(double ratio) const {
  return sample_rate_ / std::numbers::pi * std::atan(ratio * warped_cutoff_ / (2.0 * sample_rate_));
}

std::vector<double> ButterworthLowpass::filter(const std::vector<double>& x, double initial) const {
  std::vector<double> y = x;
  double u = initial;  // steady-state input level of the current section
  for (const Biquad& s : sections_) {
    const double gain = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    const double v = gain * u;
    double z1 = (s.b1 + s.b2) * u - (s.a1 + s.a2) * v;
    double z2 = s.b2 * u - s.a2 * v;
    for (double& sample : y) {
      const double in = sample;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      sample = out;
    }
    u = v;
  }
  return y;
}

std::vector<double> ButterworthLowpass::filtfilt(const std::vector<double>& x) const {
  const std::size_t n = x.size();
  if (n == 0) return {};
  const std::size_t pad = std::min<std::size_t>(3 * static_cast<std::size_t>(order_), n - 1);
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t k = pad; k >= 1; --k) ext.push_back(2.0 * x.front() - x[k]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t k = 1; k <= pad; ++k) ext.push_back(2.0 * x.back() - x[n - 1 - k]);

  std::vector<double> fwd = filter(ext, ext.front());
  std::reverse(fwd.begin(), fwd.end());
  std::vector<double> bwd = filter(fwd, fwd.front());
  std::reverse(bwd.begin(), bwd.end());
  return {bwd.begin() + static_cast<std::ptrdiff_t>(pad),
          bwd.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

Signal butterworth_lowpass(const Signal& signal, double cutoff_hz, int order) {
  const ButterworthLowpass design(order, cutoff_hz, signal.sample_rate);
  return Signal{design.filtfilt(signal.samples), signal.sample_rate, signal.t0};
}

Polyline::Polyline(std::vector<Vertex> vertices) : vertices_(std::move(vertices)) {
  for (std::size_t i = 1; i < vertices_.size(); ++i) {
    if (!(vertices_[i].time > vertices_[i - 1].time))
      throw ValidationError("polyline vertex times must be strictly increasing");
  }
}

double Polyline::operator()(double t) const {
  if (vertices_.empty()) throw ValidationError("empty polyline");
  if (t <= vertices_.front().time) return vertices_.front().value;
  if (t >= vertices_.back().time) return vertices_.back().value;
  const auto hi = std::upper_bound(vertices_.begin(), vertices_.end(), t,
                                   [](double v, const Vertex& p) { return v < p.time; });
  const auto lo = hi - 1;
  const double f = (t - lo->time) / (hi->time - lo->time);
  return lo->value + f * (hi->value - lo->value);
}

namespace {

// Indices that are the earliest extremum of their centered window; `better(a, b)`
// is true when a strictly beats b.
template <typename Better>
std::vector<std::size_t> window_extrema(const std::vector<double>& x, std::size_t half,
                                        Better better) {
  const std::size_t n = x.size();
  std::vector<std::size_t> out;
  std::deque<std::size_t> dq;  // candidates, values non-increasing under `better`
  std::size_t next = 0;        // next index to enter the window
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t hi = std::min(n - 1, i + half);
    const std::size_t lo = i >= half ? i - half : 0;
    for (; next <= hi; ++next) {
      while (!dq.empty() && better(x[next], x[dq.back()])) dq.pop_back();
      dq.push_back(next);
    }
    while (dq.front() < lo) dq.pop_front();
    if (dq.front() == i) out.push_back(i);
  }
  return out;
}

// Without an interior extremum the envelope is the segment through both ends.
// Otherwise only genuine window extrema are used; the polyline holds its outer
// values toward the edges, so a mid-slope first or last sample never bends it.
Polyline envelope_polyline(const Signal& s, const std::vector<std::size_t>& idx) {
  const std::size_t last = s.size() - 1;
  const bool interior = std::any_of(idx.begin(), idx.end(), [last](std::size_t i) { return i > 0 && i < last; });
  if (!interior)
    return Polyline({{s.time_at(0), s.samples.front()}, {s.time_at(last), s.samples.back()}});
  std::vector<Vertex> v;
  v.reserve(idx.size());
  for (std::size_t i : idx) v.push_back({s.time_at(i), s.samples[i]});
  return Polyline(std::move(v));
}

}  // namespace

Envelope sliding_extrema(const Signal& signal, double window_s) {
  if (!(window_s > 0.0)) throw ValidationError("extrema window must be positive");
  if (signal.size() < 2) throw ValidationError("sliding_extrema needs at least 2 samples");
  const auto len = static_cast<std::size_t>(std::llround(window_s * signal.sample_rate));
  const std::size_t half = len / 2;
  const auto maxima = window_extrema(signal.samples, half, [](double a, double b) { return a > b; });
  const auto minima = window_extrema(signal.samples, half, [](double a, double b) { return a < b; });
  return Envelope{envelope_polyline(signal, maxima), envelope_polyline(signal, minima)};
}

Signal normalize(const Signal& signal, const Envelope& envelope) {
  Signal out{std::vector<double>(signal.size()), signal.sample_rate, signal.t0};
  for (std::size_t i = 0; i < signal.size(); ++i) {
    const double t = signal.time_at(i);
    const double lo = envelope.lower(t);
    const double span = envelope.upper(t) - lo;
    if (!(span >= kEnvelopeEpsilon)) {
      out.samples[i] = 0.5;
      continue;
    }
    out.samples[i] = std::clamp((signal.samples[i] - lo) / span, 0.0, 1.0);
  }
  return out;
}

}  // namespace breathflow
