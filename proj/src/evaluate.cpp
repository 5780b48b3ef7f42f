#include "breathflow/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "breathflow/error.hpp"
#include "csv.hpp"

namespace breathflow {

std::string_view to_string(SensorSelection s) noexcept {
  switch (s) {
    case SensorSelection::upper: return "upper";
    case SensorSelection::lower: return "lower";
    case SensorSelection::mean: return "mean";
  }
  return "lower";
}

SensorSelection parse_sensor(std::string_view name) {
  if (name == "upper") return SensorSelection::upper;
  if (name == "lower") return SensorSelection::lower;
  if (name == "mean") return SensorSelection::mean;
  throw ValidationError("unknown sensor '" + std::string(name) + "' (upper|lower|mean)");
}

namespace {

Signal uniform_signal(const std::vector<double>& times, std::vector<double> values,
                      const std::string& source) {
  if (times.size() < 2) throw LoadError(source + ": reference needs at least 2 samples");
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(dt > 0.0)) throw LoadError(source + ": reference times must increase");
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double step = times[i] - times[i - 1];
    if (std::abs(step - dt) > 1e-3 * dt)
      throw LoadError(source + ": raw reference must be uniformly sampled (row " +
                      std::to_string(i + 1) + ")");
  }
  return Signal{std::move(values), 1.0 / dt, times.front()};
}

}  // namespace

ReferenceTrace parse_reference_csv(std::istream& in, SensorSelection sensor,
                                   const std::string& source) {
  const csv::Table table = csv::parse(in, source);
  const int t = table.column("time_s");
  if (t < 0) throw LoadError(source + ": missing time_s column");
  std::vector<double> times;
  for (const auto& row : table.rows) times.push_back(row[t]);

  ReferenceTrace trace;
  trace.sensor = sensor;
  auto column = [&](int c) {
    std::vector<double> v;
    for (const auto& row : table.rows) v.push_back(row[c]);
    return v;
  };

  if (const int br = table.column("br_rpm"); br >= 0) {
    trace.kind = ReferenceKind::br_series;
    trace.series.times = times;
    trace.series.br = column(br);
    if (trace.series.empty()) throw LoadError(source + ": empty BR series");
    for (std::size_t i = 1; i < times.size(); ++i) {
      if (!(times[i] > times[i - 1]))
        throw LoadError(source + ": BR series times must be strictly increasing");
    }
    return trace;
  }

  trace.kind = ReferenceKind::raw_signal;
  if (const int v = table.column("value"); v >= 0) {
    trace.raw = uniform_signal(times, column(v), source);
    return trace;
  }
  const int up = table.column("upper");
  const int lo = table.column("lower");
  if (up < 0 || lo < 0)
    throw LoadError(source + ": expected columns value, br_rpm, or upper+lower");
  std::vector<double> values;
  switch (sensor) {
    case SensorSelection::upper: values = column(up); break;
    case SensorSelection::lower: values = column(lo); break;
    case SensorSelection::mean: {
      const auto a = column(up);
      const auto b = column(lo);
      for (std::size_t i = 0; i < a.size(); ++i) values.push_back(0.5 * (a[i] + b[i]));
      break;
    }
  }
  trace.raw = uniform_signal(times, std::move(values), source);
  return trace;
}

ReferenceTrace load_reference_csv(const std::filesystem::path& path, SensorSelection sensor) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  return parse_reference_csv(in, sensor, path.string());
}

BrSeries process_reference(const Signal& raw, const SignalChainConfig& config) {
  const SignalChainResult r = run_signal_chain(raw, config);
  if (r.br.empty())
    throw InsufficientSignalError("insufficient peaks in reference: " +
                                  std::to_string(r.peak_times.size()) + " found");
  return r.br;
}

BrSeries reference_br(const ReferenceTrace& trace, const SignalChainConfig& config) {
  return trace.kind == ReferenceKind::br_series ? trace.series
                                                : process_reference(trace.raw, config);
}

EvalReport score(const BrSeries& video, const BrSeries& reference) {
  if (video.empty() || reference.empty()) throw ValidationError("cannot score an empty series");
  const double start = std::max(video.times.front(), reference.times.front());
  const double end = std::min(video.times.back(), reference.times.back());
  EvalReport r;
  double sum_abs = 0.0, sum = 0.0, sum_sq = 0.0, sum_v = 0.0;
  if (end >= start) {
    for (std::size_t i = 0; i < video.size(); ++i) {
      const double t = video.times[i];
      if (t < start || t > end) continue;
      const double d = video.br[i] - reference.at(t);
      sum_abs += std::abs(d);
      sum += d;
      sum_sq += d * d;
      sum_v += video.br[i];
      ++r.n_samples;
    }
  }
  if (r.n_samples == 0)
    throw ValidationError("video and reference series do not overlap in time");
  const double n = static_cast<double>(r.n_samples);
  r.mae = sum_abs / n;
  r.bias = sum / n;
  r.rmsd = std::sqrt(sum_sq / n);
  r.mean_br = sum_v / n;
  r.duration_s = end - start;
  return r;
}

std::string to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["mae"] = report.mae;
  j["bias"] = report.bias;
  j["rmsd"] = report.rmsd;
  j["mean_br"] = report.mean_br;
  j["duration_s"] = report.duration_s;
  j["n_samples"] = report.n_samples;
  return j.dump(2);
}

}  // namespace breathflow
