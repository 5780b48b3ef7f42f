#include "breathflow/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "breathflow/error.hpp"
#include "csv.hpp"

namespace breathflow::synth {

namespace {

enum Stream : std::uint64_t {
  kChestTexture = 1,
  kDistractorTexture = 2,
  kBackgroundTexture = 3,
  kNoise = 4,
  kMaskJitter = 5,
};

// Width x height texture: uniform bytes, 5x5 box blur (edge replication),
// stretched to [32, 224].
std::vector<float> make_texture(int width, int height, std::uint64_t seed, std::uint64_t stream) {
  Xorshift64Star rng(seed, stream);
  std::vector<int> raw(static_cast<std::size_t>(width) * height);
  for (int& v : raw) v = rng.next_byte();
  std::vector<float> out(raw.size());
  float lo = 1e9f, hi = -1e9f;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      int sum = 0;
      for (int dy = -2; dy <= 2; ++dy) {
        const int yy = std::clamp(y + dy, 0, height - 1);
        for (int dx = -2; dx <= 2; ++dx) sum += raw[static_cast<std::size_t>(yy) * width + std::clamp(x + dx, 0, width - 1)];
      }
      const float v = static_cast<float>(sum) / 25.0f;
      out[static_cast<std::size_t>(y) * width + x] = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  for (float& v : out) v = hi > lo ? 32.0f + (v - lo) * (192.0f / (hi - lo)) : 128.0f;
  return out;
}

struct Layout {
  int chest_x0, chest_x1;  // columns [x0, x1)
  int chest_y0, chest_y1;  // rows at rest [y0, y1)
  int dist_y0, dist_y1;    // distractor rows
};

Layout layout_for(int w, int h) {
  return {w / 8, w - w / 8, (15 * h) / 100, (55 * h) / 100, (65 * h) / 100, (90 * h) / 100};
}

double json_number(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ValidationError(std::string("scenario field '") + key + "' must be a number");
  return j[key].get<double>();
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

Xorshift64Star::Xorshift64Star(std::uint64_t seed, std::uint64_t stream)
    : state_(splitmix64(seed ^ (stream * 0xD1B54A32D192ED03ull))) {
  if (state_ == 0) state_ = 1;
}

std::uint64_t Xorshift64Star::next() noexcept {
  state_ ^= state_ >> 12;
  state_ ^= state_ << 25;
  state_ ^= state_ >> 27;
  return state_ * 2685821657736338717ull;
}

double Xorshift64Star::next_unit() noexcept {
  return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
}

double Xorshift64Star::next_gaussian() noexcept {
  const double u1 = next_unit();
  const double u2 = next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int Xorshift64Star::next_int(int lo, int hi) noexcept {
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<int>(next() % span);
}

void SynthScenario::validate() const {
  if (width < 32 || height < 32) throw ValidationError("synthetic frames must be at least 32x32");
  if (!(fps > 0.0)) throw ValidationError("fps must be positive");
  if (!(duration_s >= 60.0))
    throw ValidationError("duration_s must be at least 60 s (breath-rate averaging window)");
  if (br_profile.empty()) throw ValidationError("br_profile must not be empty");
  if (br_profile.front().start_s != 0.0) throw ValidationError("br_profile must start at 0 s");
  for (std::size_t i = 0; i < br_profile.size(); ++i) {
    if (!(br_profile[i].rpm >= 5.0 && br_profile[i].rpm <= 40.0))
      throw ValidationError("br_profile rates must lie in [5, 40] rpm");
    if (i > 0 && !(br_profile[i].start_s > br_profile[i - 1].start_s))
      throw ValidationError("br_profile start times must be strictly increasing");
  }
  const Layout l = layout_for(width, height);
  if (!(motion_amplitude >= 0.0) || motion_amplitude > l.chest_y0)
    throw ValidationError("motion_amplitude must lie in [0, " + std::to_string(l.chest_y0) + "] px");
  if (!(noise_sigma >= 0.0)) throw ValidationError("noise_sigma must be non-negative");
  if (mask_jitter < 0) throw ValidationError("mask_jitter must be non-negative");
  if (distractor) {
    if (!(distractor->amplitude_px >= 0.0) || distractor->amplitude_px > l.chest_x0)
      throw ValidationError("distractor amplitude out of range");
    if (!(distractor->frequency_hz > 0.0 && distractor->frequency_hz < fps / 2.0))
      throw ValidationError("distractor frequency must lie in (0, fps/2)");
  }
}

std::size_t SynthScenario::frame_count() const {
  return static_cast<std::size_t>(std::llround(duration_s * fps));
}

SynthScenario scenario_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("scenario must be a JSON object");
  static const char* const known[] = {"width", "height", "fps", "duration_s", "br_profile",
                                      "motion_amplitude", "texture_seed", "distractor",
                                      "noise_sigma", "mask_jitter"};
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(std::begin(known), std::end(known),
                     [&](const char* k) { return key == k; }) == std::end(known))
      throw ValidationError("unknown scenario field '" + key + "'");
  }
  SynthScenario s;
  s.width = static_cast<int>(json_number(j, "width", s.width));
  s.height = static_cast<int>(json_number(j, "height", s.height));
  s.fps = json_number(j, "fps", s.fps);
  s.duration_s = json_number(j, "duration_s", s.duration_s);
  s.motion_amplitude = json_number(j, "motion_amplitude", s.motion_amplitude);
  s.noise_sigma = json_number(j, "noise_sigma", s.noise_sigma);
  s.mask_jitter = static_cast<int>(json_number(j, "mask_jitter", s.mask_jitter));
  if (j.contains("texture_seed")) {
    if (!j["texture_seed"].is_number_unsigned() && !j["texture_seed"].is_number_integer())
      throw ValidationError("texture_seed must be an integer");
    s.texture_seed = j["texture_seed"].get<std::uint64_t>();
  }
  if (j.contains("br_profile")) {
    const auto& p = j["br_profile"];
    if (p.is_number()) {
      s.br_profile = {{0.0, p.get<double>()}};
    } else if (p.is_array()) {
      s.br_profile.clear();
      for (const auto& seg : p) {
        if (!seg.is_object()) throw ValidationError("br_profile entries must be objects");
        s.br_profile.push_back({json_number(seg, "start_s", 0.0), json_number(seg, "rpm", 0.0)});
      }
    } else {
      throw ValidationError("br_profile must be a number or an array");
    }
  }
  if (j.contains("distractor") && !j["distractor"].is_null()) {
    const auto& d = j["distractor"];
    if (!d.is_object()) throw ValidationError("distractor must be an object or null");
    s.distractor = DistractorBand{json_number(d, "amplitude", 5.0), json_number(d, "frequency_hz", 0.7)};
  }
  s.validate();
  return s;
}

SynthScenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

std::string to_json(const SynthScenario& s) {
  nlohmann::ordered_json j;
  j["width"] = s.width;
  j["height"] = s.height;
  j["fps"] = s.fps;
  j["duration_s"] = s.duration_s;
  j["br_profile"] = nlohmann::ordered_json::array();
  for (const auto& seg : s.br_profile) j["br_profile"].push_back({{"start_s", seg.start_s}, {"rpm", seg.rpm}});
  j["motion_amplitude"] = s.motion_amplitude;
  j["texture_seed"] = s.texture_seed;
  if (s.distractor) {
    j["distractor"] = {{"amplitude", s.distractor->amplitude_px},
                       {"frequency_hz", s.distractor->frequency_hz}};
  } else {
    j["distractor"] = nullptr;
  }
  j["noise_sigma"] = s.noise_sigma;
  j["mask_jitter"] = s.mask_jitter;
  return j.dump(2);
}

double br_at(const std::vector<BrSegment>& profile, double t) {
  double rpm = profile.front().rpm;
  for (const auto& seg : profile) {
    if (seg.start_s <= t) rpm = seg.rpm;
  }
  return rpm;
}

double breath_phase(const std::vector<BrSegment>& profile, double t) {
  double cycles = 0.0;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const double a = profile[i].start_s;
    if (t <= a) break;
    const double b = i + 1 < profile.size() ? std::min(t, profile[i + 1].start_s) : t;
    cycles += (b - a) * profile[i].rpm / 60.0;
  }
  return 2.0 * std::numbers::pi * cycles;
}

SynthDataset generate(const SynthScenario& s) {
  s.validate();
  const int w = s.width;
  const int h = s.height;
  const Layout l = layout_for(w, h);
  const auto chest = make_texture(w, h, s.texture_seed, kChestTexture);
  const auto background = make_texture(w, h, s.texture_seed, kBackgroundTexture);
  const auto distractor = make_texture(w, h, s.texture_seed, kDistractorTexture);
  Xorshift64Star noise(s.texture_seed, kNoise);
  Xorshift64Star jitter(s.texture_seed, kMaskJitter);

  const std::size_t count = s.frame_count();
  SynthDataset out;
  out.frames.reserve(count);
  out.masks.reserve(count);
  std::vector<double> reference(count);

  std::vector<float> value(static_cast<std::size_t>(w) * h);
  for (std::size_t k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) / s.fps;
    const double lift = s.motion_amplitude * std::sin(breath_phase(s.br_profile, t));
    reference[k] = lift;
    const double oy = -lift;  // image rows grow downward
    const double ox = s.distractor ? s.distractor->amplitude_px *
                                         std::sin(2.0 * std::numbers::pi * s.distractor->frequency_hz * t)
                                   : 0.0;

    for (int y = 0; y < h; ++y) {
      const double sy = y - oy;  // chest texture row seen at image row y
      const bool in_chest_rows = sy >= l.chest_y0 && sy < l.chest_y1;
      const int y0 = std::clamp(static_cast<int>(std::floor(sy)), 0, h - 1);
      const int y1 = std::min(y0 + 1, h - 1);
      const float fy = static_cast<float>(std::clamp(sy - std::floor(sy), 0.0, 1.0));
      const bool in_dist_rows = s.distractor && y >= l.dist_y0 && y < l.dist_y1;
      for (int x = 0; x < w; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        float v = background[i];
        if (in_chest_rows && x >= l.chest_x0 && x < l.chest_x1) {
          const float a = chest[static_cast<std::size_t>(y0) * w + x];
          const float b = chest[static_cast<std::size_t>(y1) * w + x];
          v = a + fy * (b - a);
        } else if (in_dist_rows) {
          const double sx = x - ox;
          if (sx >= l.chest_x0 && sx < l.chest_x1) {
            const int x0 = std::clamp(static_cast<int>(std::floor(sx)), 0, w - 1);
            const int x1 = std::min(x0 + 1, w - 1);
            const float fx = static_cast<float>(sx - std::floor(sx));
            const float a = distractor[static_cast<std::size_t>(y) * w + x0];
            const float b = distractor[static_cast<std::size_t>(y) * w + x1];
            v = a + fx * (b - a);
          }
        }
        value[i] = v;
      }
    }

    std::vector<std::uint8_t> pixels(value.size());
    for (std::size_t i = 0; i < value.size(); ++i) {
      double v = value[i];
      if (s.noise_sigma > 0.0) v += s.noise_sigma * noise.next_gaussian();
      pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
    out.frames.emplace_back(w, h, std::move(pixels), static_cast<int>(k), s.fps);

    std::vector<std::uint8_t> bits(value.size(), 0);
    int top = static_cast<int>(std::lround(l.chest_y0 + oy));
    int bottom = static_cast<int>(std::lround(l.chest_y1 + oy));
    if (s.mask_jitter > 0) {
      top += jitter.next_int(-s.mask_jitter, s.mask_jitter);
      bottom += jitter.next_int(-s.mask_jitter, s.mask_jitter);
    }
    for (int y = std::max(0, top); y < std::min(h, bottom); ++y)
      std::fill_n(bits.begin() + static_cast<std::ptrdiff_t>(y) * w + l.chest_x0,
                  l.chest_x1 - l.chest_x0, std::uint8_t{1});
    if (s.distractor) {
      const int left = std::max(0, static_cast<int>(std::lround(l.chest_x0 + ox)));
      const int right = std::min(w, static_cast<int>(std::lround(l.chest_x1 + ox)));
      for (int y = l.dist_y0; y < l.dist_y1; ++y)
        for (int x = left; x < right; ++x) bits[static_cast<std::size_t>(y) * w + x] = 1;
    }
    out.masks.emplace_back(w, h, std::move(bits));
  }

  out.reference.kind = ReferenceKind::raw_signal;
  out.reference.sensor = SensorSelection::lower;
  out.reference.raw = Signal{std::move(reference), s.fps, 0.0};
  return out;
}

BrSeries ground_truth_br(const SynthScenario& s, double step_s) {
  BrSeries truth;
  const double end = static_cast<double>(s.frame_count() - 1) / s.fps;
  for (std::size_t i = 0;; ++i) {
    const double t = static_cast<double>(i) * step_s;
    if (t > end + 1e-9) break;
    truth.times.push_back(t);
    truth.br.push_back(br_at(s.br_profile, t));
  }
  return truth;
}

void write_dataset(const SynthDataset& data, const SynthScenario& scenario,
                   const std::filesystem::path& out) {
  namespace fs = std::filesystem;
  fs::create_directories(out / "frames");
  fs::create_directories(out / "masks");
  char name[32];
  for (std::size_t i = 0; i < data.frames.size(); ++i) {
    std::snprintf(name, sizeof name, "frame_%06zu.pgm", i);
    write_pgm(out / "frames" / name, data.frames[i]);
    std::snprintf(name, sizeof name, "mask_%06zu.pgm", i);
    write_pgm(out / "masks" / name, data.masks[i]);
  }
  {
    csv::Writer ref(out / "reference.csv", {"time_s", "value"});
    const Signal& r = data.reference.raw;
    for (std::size_t i = 0; i < r.size(); ++i) ref.row({r.time_at(i), r.samples[i]});
  }
  {
    csv::Writer truth(out / "truth_br.csv", {"time_s", "br_rpm"});
    const BrSeries t = ground_truth_br(scenario);
    for (std::size_t i = 0; i < t.size(); ++i) truth.row({t.times[i], t.br[i]});
  }
  std::ofstream js(out / "scenario.json");
  js << to_json(scenario) << '\n';
}

}  // namespace breathflow::synth
