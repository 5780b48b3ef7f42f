#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "breathflow/dsp.hpp"

namespace breathflow {

struct PeakConfig {
  double min_height = 0.496;
  double min_prominence = 0.1848;
  double min_distance_s = 1.5;

  void validate() const;
  friend bool operator==(const PeakConfig&, const PeakConfig&) = default;
};

/// Smallest admissible index gap between two kept peaks.
std::size_t distance_in_samples(double min_distance_s, double sample_rate);

/// Local maxima (plateaus resolve to the floor of their midpoint), excluding the
/// first and last sample.
std::vector<std::size_t> local_maxima(std::span<const double> x);

/// Height above the higher of the lowest points on either side, each side searched
/// up to the nearest strictly higher sample or the signal edge.
double prominence(std::span<const double> x, std::size_t peak);

/// Peak selection with the same rule order as SciPy's find_peaks: height, then
/// distance (taller peaks first, earlier index on equal height), then prominence.
std::vector<std::size_t> find_peaks(std::span<const double> x, double min_height,
                                    double min_prominence, std::size_t min_distance);

std::vector<std::size_t> find_peaks(const Signal& signal, const PeakConfig& config = {});

inline constexpr double kDefaultBrWindowS = 60.0;

/// Breath rate (respirations/min) at each peak from the second on.
struct BrSeries {
  std::vector<double> times;
  std::vector<double> br;
  double window_s = kDefaultBrWindowS;

  std::size_t size() const noexcept { return times.size(); }
  bool empty() const noexcept { return times.empty(); }
  /// Step interpolation: value of the last sample at or before t (first value before it).
  double at(double t) const;
};

/// br(t_k) = 60 / mean of the inter-peak intervals ending in (t_k - window_s, t_k].
BrSeries intervals_to_br(std::span<const double> peak_times, double window_s = kDefaultBrWindowS);

}  // namespace breathflow
