#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "breathflow/evaluate.hpp"
#include "breathflow/imagery.hpp"
#include "breathflow/peaks.hpp"

// Synthetic ground truth: a textured chest band oscillating vertically at a
// prescribed breath rate, optional horizontally moving distractor band, pixel noise.
namespace breathflow::synth {

/// xorshift64* (Vigna): x ^= x >> 12; x ^= x << 25; x ^= x >> 27; out = x * 2685821657736338717.
/// The state is seeded with splitmix64(seed ^ (stream * 0xD1B54A32D192ED03)), 0 mapped to 1.
class Xorshift64Star {
 public:
  Xorshift64Star(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next() noexcept;
  std::uint8_t next_byte() noexcept { return static_cast<std::uint8_t>(next() >> 56); }
  double next_unit() noexcept;      // (0, 1]
  double next_gaussian() noexcept;  // Box-Muller, cosine branch only
  int next_int(int lo, int hi) noexcept;  // inclusive

 private:
  std::uint64_t state_;
};

std::uint64_t splitmix64(std::uint64_t z) noexcept;

struct BrSegment {
  double start_s = 0.0;
  double rpm = 15.0;
};

struct DistractorBand {
  double amplitude_px = 5.0;
  double frequency_hz = 0.7;
};

struct SynthScenario {
  int width = 160;
  int height = 120;
  double fps = 30.0;
  double duration_s = 90.0;
  std::vector<BrSegment> br_profile{{0.0, 15.0}};  // piecewise constant
  double motion_amplitude = 3.0;                   // pixels
  std::uint64_t texture_seed = 1;
  std::optional<DistractorBand> distractor;
  double noise_sigma = 2.0;  // luminance units
  int mask_jitter = 0;       // max per-frame boundary jitter, pixels

  void validate() const;  // throws ValidationError
  std::size_t frame_count() const;
};

SynthScenario scenario_from_json(const std::string& text);
SynthScenario load_scenario(const std::filesystem::path& path);
std::string to_json(const SynthScenario& scenario);

double br_at(const std::vector<BrSegment>& profile, double t);
/// Accumulated breathing phase 2*pi * integral of rpm/60 from 0 to t.
double breath_phase(const std::vector<BrSegment>& profile, double t);

struct SynthDataset {
  std::vector<Frame> frames;
  std::vector<Mask> masks;
  ReferenceTrace reference;  // analytic upward chest displacement, one sample per frame
};

SynthDataset generate(const SynthScenario& scenario);

/// Exact profile sampled every `step_s` seconds over the recording.
BrSeries ground_truth_br(const SynthScenario& scenario, double step_s = 1.0);

/// frames/, masks/, reference.csv, truth_br.csv, scenario.json under `out`.
void write_dataset(const SynthDataset& data, const SynthScenario& scenario,
                   const std::filesystem::path& out);

}  // namespace breathflow::synth
