#pragma once

#include <vector>

#include "breathflow/dsp.hpp"
#include "breathflow/peaks.hpp"

namespace breathflow {

/// Signal-processing stages applied to any breathing trace, video-derived or reference.
struct SignalChainConfig {
  double smooth_width_s = 0.65;
  double cutoff_hz = 0.496;
  int butterworth_order = 4;
  double extrema_window_s = 6.0;
  PeakConfig peaks{};
  double br_window_s = kDefaultBrWindowS;

  void validate() const;
};

struct SignalChainResult {
  Signal smoothed;
  Signal filtered;
  Envelope envelope;
  Signal normalized;
  std::vector<std::size_t> peak_indices;
  std::vector<double> peak_times;
  BrSeries br;  // empty when fewer than two peaks were found
};

/// moving average -> Butterworth -> envelope normalization -> peaks -> breath rate.
/// Never throws for a short peak list; check `br.empty()`.
SignalChainResult run_signal_chain(const Signal& signal, const SignalChainConfig& config);

}  // namespace breathflow
