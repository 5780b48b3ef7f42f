#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "breathflow/error.hpp"
#include "breathflow/evaluate.hpp"
#include "breathflow/kernels.hpp"
#include "breathflow/pipeline.hpp"
#include "breathflow/synth.hpp"

namespace bf = breathflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;
constexpr int kExitSignal = 4;

struct RunArgs {
  std::string frames;
  std::string masks;
  bool fallback = false;
  std::optional<double> fps;
  std::string config;
  std::string out;
  std::string ref;
  std::optional<std::string> sensor;
  unsigned workers = 1;
  std::string dump_flow;
  bool quiet = false;
  std::map<std::string, std::string> overrides;
};

void write_report(const bf::EvalReport& report, const std::filesystem::path& path) {
  const std::string text = bf::to_json(report);
  std::ofstream out(path);
  if (!out) throw bf::LoadError("cannot write " + path.string());
  out << text << '\n';
  std::cout << text << '\n';
}

int run(const RunArgs& args) {
  if (args.masks.empty() == !args.fallback) {
    std::cerr << "run: exactly one of --masks or --fallback-seg is required\n";
    return kExitUsage;
  }
  bf::PipelineConfig config;
  if (!args.config.empty()) config = bf::load_config(args.config);
  for (const auto& [key, value] : args.overrides) bf::set_config_field(config, key, value);
  if (args.fps) config.fps = *args.fps;
  if (args.sensor) config.sensor = bf::parse_sensor(*args.sensor);
  config.validate();

  const auto frames = bf::load_frame_sequence(args.frames, config.fps);
  std::vector<bf::Mask> masks;
  if (!args.fallback) {
    masks = bf::load_mask_sequence(
        args.masks, bf::MaskExpectation{frames.front().width(), frames.front().height(), frames.size()});
  }

  bf::ExecutionOptions exec;
  exec.workers = args.workers;
  if (!args.dump_flow.empty()) exec.flow_dump = args.dump_flow;
  if (!args.quiet) {
    exec.progress = [](std::size_t done, std::size_t total) {
      if (done % 100 == 0 || done == total)
        std::fprintf(stderr, "\rflow %zu/%zu", done, total);
      if (done == total) std::fputc('\n', stderr);
    };
  }
  const bf::PipelineResult result = bf::run_pipeline(frames, masks, config, exec);
  bf::write_outputs(result, args.out);

  if (!args.ref.empty()) {
    const bf::ReferenceTrace ref = bf::load_reference_csv(args.ref, config.sensor);
    const bf::BrSeries ref_br = bf::reference_br(ref, config.chain);
    bf::write_br_csv(ref_br, std::filesystem::path(args.out) / "reference_br.csv");
    write_report(bf::score(result.chain.br, ref_br), std::filesystem::path(args.out) / "report.json");
  }
  if (!args.quiet) {
    std::fprintf(stderr, "%zu peaks, %zu BR samples, kernels %s\n", result.chain.peak_times.size(),
                 result.chain.br.size(), std::string(bf::simd::isa_name(bf::simd::active_kernels().isa)).c_str());
  }
  return kExitOk;
}

int synth(const std::string& scenario_path, const std::string& out) {
  const bf::synth::SynthScenario scenario = bf::synth::load_scenario(scenario_path);
  const bf::synth::SynthDataset data = bf::synth::generate(scenario);
  bf::synth::write_dataset(data, scenario, out);
  std::fprintf(stderr, "wrote %zu frames to %s\n", data.frames.size(), out.c_str());
  return kExitOk;
}

int eval(const std::string& video, const std::string& ref, const std::string& sensor,
         const std::string& config_path, const std::string& out) {
  bf::PipelineConfig config;
  if (!config_path.empty()) config = bf::load_config(config_path);
  const bf::ReferenceTrace v = bf::load_reference_csv(video);
  if (v.kind != bf::ReferenceKind::br_series)
    throw bf::ValidationError(video + ": expected a time_s,br_rpm series");
  const bf::ReferenceTrace r =
      bf::load_reference_csv(ref, sensor.empty() ? config.sensor : bf::parse_sensor(sensor));
  write_report(bf::score(v.series, bf::reference_br(r, config.chain)), out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Breath rate estimation from chest motion in video"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run_cmd = app.add_subcommand("run", "Estimate breath rate from a frame sequence");
  run_cmd->add_option("--frames", run_args.frames, "Directory of PGM/PPM frames or a BSR1 raw stream")
      ->required();
  auto* masks_opt = run_cmd->add_option("--masks", run_args.masks, "Directory of mask PGMs");
  auto* fallback_opt =
      run_cmd->add_flag("--fallback-seg", run_args.fallback, "Segment by frame differencing");
  masks_opt->excludes(fallback_opt);
  run_cmd->add_option("--fps", run_args.fps, "Frame rate in Hz");
  run_cmd->add_option("--config", run_args.config, "JSON config file");
  run_cmd->add_option("--out", run_args.out, "Output directory")->required();
  run_cmd->add_option("--ref", run_args.ref, "Reference CSV");
  run_cmd->add_option("--sensor", run_args.sensor, "Reference channel: lower, upper or mean");
  run_cmd->add_option("--workers", run_args.workers, "Flow worker threads")->check(CLI::Range(1u, 256u));
  run_cmd->add_option("--dump-flow", run_args.dump_flow, "Write raw flow fields (BFL1)");
  run_cmd->add_flag("--quiet", run_args.quiet, "No progress output");
  for (std::string_view key : bf::config_keys()) {
    const std::string name(key);
    if (name == "fps" || name == "sensor") continue;
    run_cmd->add_option_function<std::string>(
        "--" + name, [&run_args, name](const std::string& v) { run_args.overrides[name] = v; },
        "Override config field " + name);
  }

  std::string scenario, synth_out;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--scenario", scenario, "Scenario JSON")->required();
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();

  std::string video, ref, sensor, eval_config, eval_out;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Score a BR series against a reference");
  eval_cmd->add_option("--video", video, "Video BR CSV (time_s,br_rpm)")->required();
  eval_cmd->add_option("--ref", ref, "Reference CSV")->required();
  eval_cmd->add_option("--sensor", sensor, "Reference channel: lower, upper or mean");
  eval_cmd->add_option("--config", eval_config, "JSON config for processing raw references");
  eval_cmd->add_option("--out", eval_out, "Report JSON path")->required();

  CLI::App* defaults_cmd = app.add_subcommand("defaults", "Print the default config as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run_cmd) return run(run_args);
    if (*synth_cmd) return synth(scenario, synth_out);
    if (*eval_cmd) return eval(video, ref, sensor, eval_config, eval_out);
    if (*defaults_cmd) {
      std::cout << bf::to_json(bf::PipelineConfig{}) << '\n';
      return kExitOk;
    }
  } catch (const bf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == bf::ErrorKind::insufficient_signal ? kExitSignal : kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitUsage;
}
