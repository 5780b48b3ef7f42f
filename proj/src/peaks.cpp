#include "breathflow/peaks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "breathflow/error.hpp"

namespace breathflow {

void PeakConfig::validate() const {
  if (!(min_distance_s > 0.0)) throw ValidationError("min_distance_s must be positive");
  if (!std::isfinite(min_height) || !std::isfinite(min_prominence))
    throw ValidationError("peak thresholds must be finite");
  if (min_prominence < 0.0) throw ValidationError("min_prominence must be >= 0");
}

std::size_t distance_in_samples(double min_distance_s, double sample_rate) {
  // Absorb representation error such as 0.1 * 30 = 3.0000000000000004.
  const double d = std::ceil(min_distance_s * sample_rate - 1e-9);
  return d < 1.0 ? 1 : static_cast<std::size_t>(d);
}

std::vector<std::size_t> local_maxima(std::span<const double> x) {
  std::vector<std::size_t> peaks;
  const std::size_t n = x.size();
  if (n < 3) return peaks;
  std::size_t i = 1;
  const std::size_t last = n - 1;
  while (i < last) {
    if (x[i - 1] < x[i]) {
      std::size_t ahead = i + 1;
      while (ahead < last && x[ahead] == x[i]) ++ahead;
      if (x[ahead] < x[i]) {
        peaks.push_back((i + ahead - 1) / 2);
        i = ahead;
      }
    }
    ++i;
  }
  return peaks;
}

double prominence(std::span<const double> x, std::size_t peak) {
  const double h = x[peak];
  double left_min = h;
  for (std::size_t i = peak + 1; i-- > 0;) {
    if (x[i] > h) break;
    left_min = std::min(left_min, x[i]);
  }
  double right_min = h;
  for (std::size_t i = peak; i < x.size(); ++i) {
    if (x[i] > h) break;
    right_min = std::min(right_min, x[i]);
  }
  return h - std::max(left_min, right_min);
}

std::vector<std::size_t> find_peaks(std::span<const double> x, double min_height,
                                    double min_prominence, std::size_t min_distance) {
  std::vector<std::size_t> peaks = local_maxima(x);
  std::erase_if(peaks, [&](std::size_t p) { return x[p] < min_height; });

  if (min_distance > 1 && peaks.size() > 1) {
    std::vector<std::size_t> order(peaks.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return x[peaks[a]] > x[peaks[b]]; });
    std::vector<bool> keep(peaks.size(), true);
    for (std::size_t j : order) {
      if (!keep[j]) continue;
      for (std::size_t k = j; k-- > 0 && peaks[j] - peaks[k] < min_distance;) keep[k] = false;
      for (std::size_t k = j + 1; k < peaks.size() && peaks[k] - peaks[j] < min_distance; ++k)
        keep[k] = false;
    }
    std::vector<std::size_t> kept;
    for (std::size_t j = 0; j < peaks.size(); ++j)
      if (keep[j]) kept.push_back(peaks[j]);
    peaks = std::move(kept);
  }

  std::erase_if(peaks, [&](std::size_t p) { return prominence(x, p) < min_prominence; });
  return peaks;
}

std::vector<std::size_t> find_peaks(const Signal& signal, const PeakConfig& config) {
  config.validate();
  return find_peaks(signal.samples, config.min_height, config.min_prominence,
                    distance_in_samples(config.min_distance_s, signal.sample_rate));
}

double BrSeries::at(double t) const {
  if (times.empty()) throw ValidationError("empty breath-rate series");
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return br.front();
  return br[static_cast<std::size_t>(it - times.begin()) - 1];
}

BrSeries intervals_to_br(std::span<const double> peak_times, double window_s) {
  if (peak_times.size() < 2)
    throw InsufficientSignalError("insufficient peaks: " + std::to_string(peak_times.size()) +
                                  " found, at least 2 required");
  if (!(window_s > 0.0)) throw ValidationError("averaging window must be positive");
  for (std::size_t i = 1; i < peak_times.size(); ++i) {
    if (!(peak_times[i] > peak_times[i - 1]))
      throw ValidationError("peak times must be strictly increasing");
  }
  BrSeries out;
  out.window_s = window_s;
  std::size_t first = 1;  // index of the earliest interval end inside the window
  for (std::size_t k = 1; k < peak_times.size(); ++k) {
    const double t = peak_times[k];
    while (!(peak_times[first] > t - window_s)) ++first;
    // Consecutive intervals telescope: their sum is t_k - t_{first-1}.
    const double mean = (t - peak_times[first - 1]) / static_cast<double>(k - first + 1);
    out.times.push_back(t);
    out.br.push_back(60.0 / mean);
  }
  return out;
}

}  // namespace breathflow
