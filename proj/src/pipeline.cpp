#include "breathflow/pipeline.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "breathflow/error.hpp"
#include "csv.hpp"

namespace breathflow {

namespace {

using json = nlohmann::ordered_json;

struct Field {
  std::string_view name;
  std::function<json(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const json&)> set;
};

double as_number(const json& v, std::string_view key) {
  if (!v.is_number()) throw ValidationError("config field '" + std::string(key) + "' must be a number");
  return v.get<double>();
}

int as_int(const json& v, std::string_view key) {
  if (!v.is_number_integer() && !v.is_number_unsigned())
    throw ValidationError("config field '" + std::string(key) + "' must be an integer");
  return v.get<int>();
}

#define BF_NUMBER(key, member) \
  Field{key, [](const PipelineConfig& c) { return json(c.member); }, \
        [](PipelineConfig& c, const json& v) { c.member = as_number(v, key); }}
#define BF_INT(key, member) \
  Field{key, [](const PipelineConfig& c) { return json(c.member); }, \
        [](PipelineConfig& c, const json& v) { c.member = as_int(v, key); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      BF_NUMBER("fps", fps),
      Field{"mask_window", [](const PipelineConfig& c) { return json(c.mask_window); },
            [](PipelineConfig& c, const json& v) {
              const int n = as_int(v, "mask_window");
              if (n < 1) throw ValidationError("mask_window must be >= 1");
              c.mask_window = static_cast<std::size_t>(n);
            }},
      BF_NUMBER("alpha", direction.alpha),
      BF_NUMBER("smooth_width_s", chain.smooth_width_s),
      BF_NUMBER("cutoff_hz", chain.cutoff_hz),
      BF_INT("butterworth_order", chain.butterworth_order),
      BF_NUMBER("extrema_window_s", chain.extrema_window_s),
      BF_NUMBER("min_height", chain.peaks.min_height),
      BF_NUMBER("min_prominence", chain.peaks.min_prominence),
      BF_NUMBER("min_distance_s", chain.peaks.min_distance_s),
      BF_NUMBER("br_window_s", chain.br_window_s),
      BF_INT("pyramid_levels", flow.pyramid_levels),
      BF_NUMBER("pyramid_scale", flow.pyramid_scale),
      BF_INT("window_radius", flow.window_radius),
      BF_INT("iterations", flow.iterations),
      BF_INT("poly_radius", flow.poly_radius),
      BF_NUMBER("poly_sigma", flow.poly_sigma),
      Field{"warm_start", [](const PipelineConfig& c) { return json(c.warm_start); },
            [](PipelineConfig& c, const json& v) {
              if (!v.is_boolean()) throw ValidationError("config field 'warm_start' must be a boolean");
              c.warm_start = v.get<bool>();
            }},
      Field{"sensor", [](const PipelineConfig& c) { return json(std::string(to_string(c.sensor))); },
            [](PipelineConfig& c, const json& v) {
              if (!v.is_string()) throw ValidationError("config field 'sensor' must be a string");
              c.sensor = parse_sensor(v.get<std::string>());
            }},
      BF_INT("fallback_threshold", fallback.threshold),
      BF_INT("fallback_dilation", fallback.dilation),
  };
  return table;
}

#undef BF_NUMBER
#undef BF_INT

const Field& field(std::string_view key) {
  for (const Field& f : fields())
    if (f.name == key) return f;
  throw ValidationError("unknown config field '" + std::string(key) + "'");
}

}  // namespace

void PipelineConfig::validate() const {
  if (!(fps > 0.0)) throw ValidationError("fps must be positive");
  if (mask_window < 1) throw ValidationError("mask_window must be >= 1");
  direction.validate();
  chain.validate();
  flow.validate();
  if (!(chain.cutoff_hz < fps / 2.0))
    throw ValidationError("cutoff_hz must be below the Nyquist frequency fps/2");
  if (fallback.threshold < 1 || fallback.threshold > 255)
    throw ValidationError("fallback_threshold must lie in [1, 255]");
  if (fallback.dilation < 0) throw ValidationError("fallback_dilation must be >= 0");
}

std::vector<std::string_view> config_keys() {
  std::vector<std::string_view> keys;
  for (const Field& f : fields()) keys.push_back(f.name);
  return keys;
}

std::string to_json(const PipelineConfig& config) {
  json j = json::object();
  for (const Field& f : fields()) j[std::string(f.name)] = f.get(config);
  return j.dump(2);
}

PipelineConfig config_from_json(const std::string& text, PipelineConfig base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) field(key).set(base, value);
  base.validate();
  return base;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str(), std::move(base));
}

void set_config_field(PipelineConfig& config, std::string_view key, const std::string& value) {
  const Field& f = field(key);
  if (key == "sensor") {
    f.set(config, json(value));
    return;
  }
  json v;
  try {
    v = json::parse(value);
  } catch (const json::exception&) {
    throw ValidationError("bad value '" + value + "' for " + std::string(key));
  }
  f.set(config, v);
}

MotionTrace extract_motion(std::span<const Frame> frames, std::span<const Mask> masks,
                           const PipelineConfig& config, const ExecutionOptions& exec) {
  config.validate();
  if (frames.size() < 2) throw SequenceError("need at least 2 frames, got " + std::to_string(frames.size()));
  if (!masks.empty() && masks.size() != frames.size()) {
    throw SequenceError("mask count mismatch: " + std::to_string(masks.size()) +
                        " != " + std::to_string(frames.size()));
  }
  const int w = frames.front().width();
  const int h = frames.front().height();
  for (const Frame& f : frames) require_same_size(w, h, f.width(), f.height(), "frame sequence");

  WorkerPool pool(exec.workers);
  const FlowEstimator estimator(config.flow, FlowContext{exec.kernels, &pool});
  TemporalMaskWindow window(config.mask_window);
  std::optional<FlowDumpWriter> dump;
  if (exec.flow_dump) dump.emplace(*exec.flow_dump, w, h);

  MotionTrace trace;
  trace.samples.reserve(frames.size() - 1);
  FlowPyramid previous;
  std::optional<FlowField> previous_flow;
  double previous_angle = 0.0;

  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Mask raw = masks.empty()
                         ? fallback_segment(frames[i == 0 ? 0 : i - 1], frames[i == 0 ? 1 : i],
                                            config.fallback)
                         : masks[i];
    const Mask mask = window.push_and_intersect(raw);
    FlowPyramid current = estimator.prepare(apply_mask(frames[i], mask));
    if (i > 0) {
      FlowField flow = estimator.estimate(
          previous, current, config.warm_start ? previous_flow : std::optional<FlowField>{});
      if (dump) dump->append(flow);
      MotionSample sample = flip_vertical(aggregate(direction_filter(flow, config.direction), mask));
      sample.frame_index = frames[i].index();
      sample.angle = angle_of(sample, previous_angle);
      previous_angle = sample.angle;
      trace.samples.push_back(sample);
      previous_flow = std::move(flow);
    }
    previous = std::move(current);
    if (exec.progress) exec.progress(i + 1, frames.size());
  }
  if (dump) dump->finish();

  trace.angle.sample_rate = config.fps;
  trace.angle.t0 = static_cast<double>(trace.samples.front().frame_index) / config.fps;
  trace.angle.samples.reserve(trace.samples.size());
  for (const MotionSample& s : trace.samples) trace.angle.samples.push_back(s.angle);
  return trace;
}

PipelineResult run_pipeline(std::span<const Frame> frames, std::span<const Mask> masks,
                            const PipelineConfig& config, const ExecutionOptions& exec) {
  config.validate();
  const double duration = static_cast<double>(frames.size()) / config.fps;
  if (duration < config.chain.br_window_s) {
    throw ValidationError("recording shorter than averaging window: " + csv::format(duration) +
                          " s < " + csv::format(config.chain.br_window_s) + " s");
  }
  PipelineResult r;
  r.motion = extract_motion(frames, masks, config, exec);
  r.chain = run_signal_chain(r.motion.angle, config.chain);
  if (r.chain.br.empty()) {
    throw InsufficientSignalError("insufficient peaks: " + std::to_string(r.chain.peak_times.size()) +
                                  " found, at least 2 required");
  }
  return r;
}

namespace {

void write_signal(const Signal& s, const std::filesystem::path& path) {
  csv::Writer out(path, {"time_s", "value"});
  for (std::size_t i = 0; i < s.size(); ++i) out.row({s.time_at(i), s.samples[i]});
}

void write_envelope(const Polyline& p, const Signal& grid, const std::filesystem::path& path) {
  csv::Writer out(path, {"time_s", "value"});
  for (std::size_t i = 0; i < grid.size(); ++i) out.row({grid.time_at(i), p(grid.time_at(i))});
}

}  // namespace

void write_br_csv(const BrSeries& series, const std::filesystem::path& path) {
  csv::Writer out(path, {"time_s", "br_rpm"});
  for (std::size_t i = 0; i < series.size(); ++i) out.row({series.times[i], series.br[i]});
}

void write_outputs(const PipelineResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    csv::Writer out(dir / "angle.csv", {"frame_index", "time_s", "angle_rad"});
    for (std::size_t i = 0; i < r.motion.samples.size(); ++i)
      out.row(r.motion.samples[i].frame_index, {r.motion.angle.time_at(i), r.motion.angle.samples[i]});
  }
  write_signal(r.chain.filtered, dir / "filtered.csv");
  write_envelope(r.chain.envelope.upper, r.chain.filtered, dir / "envelope_upper.csv");
  write_envelope(r.chain.envelope.lower, r.chain.filtered, dir / "envelope_lower.csv");
  write_signal(r.chain.normalized, dir / "normalized.csv");
  {
    csv::Writer out(dir / "peaks.csv", {"index", "time_s", "value"});
    for (std::size_t k = 0; k < r.chain.peak_indices.size(); ++k) {
      const std::size_t i = r.chain.peak_indices[k];
      out.row(static_cast<long long>(i), {r.chain.peak_times[k], r.chain.normalized.samples[i]});
    }
  }
  write_br_csv(r.chain.br, dir / "br.csv");
}

}  // namespace breathflow
