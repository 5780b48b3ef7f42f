#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "breathflow/chain.hpp"
#include "breathflow/evaluate.hpp"
#include "breathflow/imagery.hpp"
#include "breathflow/kernels.hpp"
#include "breathflow/masking.hpp"
#include "breathflow/motion.hpp"
#include "breathflow/optflow.hpp"

namespace breathflow {

/// Every tunable of the video-to-breath-rate pipeline. Serialized as a flat JSON
/// object whose keys are also the CLI flag names.
struct PipelineConfig {
  double fps = 30.0;
  std::size_t mask_window = TemporalMaskWindow::kDefaultCapacity;
  DirectionFilterConfig direction{};
  SignalChainConfig chain{};
  FlowParams flow{};
  bool warm_start = true;
  SensorSelection sensor = SensorSelection::lower;
  FallbackSegmentParams fallback{};

  void validate() const;  // throws ValidationError
};

/// Keys accepted by config_from_json / set_config_field, in serialization order.
std::vector<std::string_view> config_keys();

std::string to_json(const PipelineConfig& config);
PipelineConfig config_from_json(const std::string& text, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

/// Sets one field from its textual value (JSON literal, or a bare word for `sensor`).
void set_config_field(PipelineConfig& config, std::string_view key, const std::string& value);

struct ExecutionOptions {
  unsigned workers = 1;
  const simd::KernelTable* kernels = nullptr;  // nullptr: active_kernels()
  std::function<void(std::size_t done, std::size_t total)> progress;
  std::optional<std::filesystem::path> flow_dump;  // BFL1 file of raw flow fields
};

/// One sample per frame after the first. Aggregates are stored y-up.
struct MotionTrace {
  std::vector<MotionSample> samples;
  Signal angle;
};

/// Masks empty: fall back to motion-energy segmentation.
MotionTrace extract_motion(std::span<const Frame> frames, std::span<const Mask> masks,
                           const PipelineConfig& config, const ExecutionOptions& exec = {});

struct PipelineResult {
  MotionTrace motion;
  SignalChainResult chain;
};

/// Full pipeline. Throws ValidationError for recordings shorter than the BR
/// averaging window and InsufficientSignalError when fewer than two peaks are found.
PipelineResult run_pipeline(std::span<const Frame> frames, std::span<const Mask> masks,
                            const PipelineConfig& config, const ExecutionOptions& exec = {});

/// angle.csv, filtered.csv, envelope_upper.csv, envelope_lower.csv,
/// normalized.csv, peaks.csv, br.csv.
void write_outputs(const PipelineResult& result, const std::filesystem::path& dir);

void write_br_csv(const BrSeries& series, const std::filesystem::path& path);

}  // namespace breathflow
