#include "breathflow/chain.hpp"

#include "breathflow/error.hpp"

namespace breathflow {

void SignalChainConfig::validate() const {
  if (!(smooth_width_s > 0.0)) throw ValidationError("smooth_width_s must be positive");
  if (!(cutoff_hz > 0.0)) throw ValidationError("cutoff_hz must be positive");
  if (butterworth_order < 1) throw ValidationError("butterworth_order must be >= 1");
  if (!(extrema_window_s > 0.0)) throw ValidationError("extrema_window_s must be positive");
  if (!(br_window_s > 0.0)) throw ValidationError("br_window_s must be positive");
  peaks.validate();
}

SignalChainResult run_signal_chain(const Signal& signal, const SignalChainConfig& config) {
  config.validate();
  signal.validate();
  SignalChainResult r;
  r.smoothed = moving_average(signal, config.smooth_width_s);
  r.filtered = butterworth_lowpass(r.smoothed, config.cutoff_hz, config.butterworth_order);
  r.envelope = sliding_extrema(r.filtered, config.extrema_window_s);
  r.normalized = normalize(r.filtered, r.envelope);
  r.peak_indices = find_peaks(r.normalized, config.peaks);
  r.peak_times.reserve(r.peak_indices.size());
  for (std::size_t i : r.peak_indices) r.peak_times.push_back(r.normalized.time_at(i));
  if (r.peak_times.size() >= 2) {
    r.br = intervals_to_br(r.peak_times, config.br_window_s);
  } else {
    r.br.window_s = config.br_window_s;
  }
  return r;
}

}  // namespace breathflow
