#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "breathflow/chain.hpp"
#include "breathflow/dsp.hpp"
#include "breathflow/peaks.hpp"

namespace breathflow {

enum class SensorSelection { upper, lower, mean };

std::string_view to_string(SensorSelection s) noexcept;
SensorSelection parse_sensor(std::string_view name);  // throws ValidationError

enum class ReferenceKind { raw_signal, br_series };

/// Ground-truth breathing measurement: a raw sensor signal or a ready BR series.
struct ReferenceTrace {
  ReferenceKind kind = ReferenceKind::raw_signal;
  Signal raw;       // kind == raw_signal
  BrSeries series;  // kind == br_series
  SensorSelection sensor = SensorSelection::lower;
};

/// Header selects the kind: `time_s,value` or `time_s,upper,lower` (raw signal,
/// uniform sampling required) or `time_s,br_rpm` (BR series).
ReferenceTrace parse_reference_csv(std::istream& in, SensorSelection sensor,
                                   const std::string& source = "<reference>");
ReferenceTrace load_reference_csv(const std::filesystem::path& path,
                                  SensorSelection sensor = SensorSelection::lower);

/// Runs a raw reference through the same chain as the video signal.
/// Throws InsufficientSignalError if fewer than two peaks are found.
BrSeries process_reference(const Signal& raw, const SignalChainConfig& config);
BrSeries reference_br(const ReferenceTrace& trace, const SignalChainConfig& config);

struct EvalReport {
  double mae = 0.0;
  double bias = 0.0;
  double rmsd = 0.0;
  double mean_br = 0.0;
  double duration_s = 0.0;
  std::size_t n_samples = 0;
};

/// Compares the video series with the reference, step-resampled at the video
/// times inside the common time span.
EvalReport score(const BrSeries& video, const BrSeries& reference);

/// Flat JSON object with the six report fields.
std::string to_json(const EvalReport& report);

}  // namespace breathflow
