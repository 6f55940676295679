#include "platt/commands.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "platt/engine.h"
#include "platt/experiment.h"
#include "platt/fixtures.h"
#include "platt/hearing_sim.h"
#include "platt/wav.h"

namespace platt {
namespace {

namespace fs = std::filesystem;

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

double ParseDoubleArg(const std::map<std::string, std::string>& args, const std::string& key) {
  const auto it = args.find(key);
  if (it == args.end()) throw ConfigError("manifest lacks argument '" + key + "'");
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw ConfigError("manifest argument '" + key + "' is not a number");
  }
}

std::string Arg(const std::map<std::string, std::string>& args, const std::string& key) {
  const auto it = args.find(key);
  return it == args.end() ? std::string() : it->second;
}

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

RunManifest NewManifest(const std::string& subcommand) {
  RunManifest m;
  m.tool_version = kToolVersion;
  m.subcommand = subcommand;
  return m;
}

void FinishManifest(RunManifest& m, const std::string& path) {
  if (path.empty()) return;
  m.Write(path);
}

std::string Redirect(const std::string& path, const std::string& out_dir) {
  if (out_dir.empty() || path.empty()) return path;
  return (fs::path(out_dir) / fs::path(path).filename()).string();
}

bool IsEngineKey(const std::string& key) {
  for (const ConfigKey& k : EngineConfigKeys()) {
    if (key == k.name) return true;
  }
  return false;
}

KeyValueConfig ResolveEngineKeys(const EngineArgs& args, double input_rate) {
  KeyValueConfig given;
  const bool from_file = !args.config_path.empty();
  if (from_file) given = KeyValueConfig::ParseFile(args.config_path);
  for (const std::string& o : args.overrides) given.ApplyOverride(o);
  if (args.expansion) given.Set("platt.expansion", Num(*args.expansion));
  for (const auto& [key, value] : given.values()) {
    if (!IsEngineKey(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  if (from_file) {
    for (const ConfigKey& k : EngineConfigKeys()) {
      if (!given.Has(k.name)) {
        throw ConfigError("missing config key '" + std::string(k.name) + "' in " +
                          args.config_path);
      }
    }
  }
  KeyValueConfig resolved = DefaultKeyValues();
  if (!given.Has("sample_rate")) resolved.Set("sample_rate", Num(input_rate));
  for (const auto& [key, value] : given.values()) resolved.Set(key, value);
  return resolved;
}

EngineConfig EngineFor(const KeyValueConfig& resolved, double input_rate) {
  EngineConfig config = EngineConfigFromKeyValues(resolved, true);
  config.Validate();
  if (config.sample_rate != input_rate) {
    throw ConfigError("input sample rate " + Num(input_rate) + " Hz differs from the configured " +
                      Num(config.sample_rate) + " Hz");
  }
  return config;
}

RunManifest ProcessWith(const ProcessArgs& args, const KeyValueConfig& resolved) {
  const Audio in = ReadWav(args.input);
  const EngineConfig config = EngineFor(resolved, in.sample_rate);
  Audio out;
  out.sample_rate = in.sample_rate;
  out.format = args.format.empty() ? in.format : ParseSampleFormat(args.format);
  out.samples = ProcessStream(in.samples, in.sample_rate, config);
  WriteWav(args.output, out);

  RunManifest m = NewManifest("process");
  m.config = resolved.values();
  m.dbspl_at_fullscale = config.calibration.dbspl_at_fullscale;
  m.arguments = {{"input", args.input},
                 {"output", args.output},
                 {"format", SampleFormatName(out.format)}};
  m.AddArtifact("input", args.input);
  m.AddArtifact("output", args.output);
  FinishManifest(m, args.manifest_path.empty() ? args.output + ".manifest.json"
                                               : args.manifest_path);
  return m;
}

void WriteChannelHeader(std::ostream& out, const FilterbankSpec& spec, const char* first) {
  out << first;
  for (const ChannelSpec& c : spec.channels()) out << ',' << Num(c.center_hz);
  out << '\n';
}

void WriteRow(std::ostream& out, const std::string& lead, const ChannelVector& values) {
  out << lead;
  for (double v : values) out << ',' << Num(v);
  out << '\n';
}

RunManifest AnalyzeWith(const AnalyzeArgs& args, const KeyValueConfig& resolved) {
  const Audio in = ReadWav(args.input);
  const EngineConfig config = EngineFor(resolved, in.sample_rate);
  fs::create_directories(args.out_dir);
  Engine engine(config);
  const FilterbankSpec& spec = engine.filterbank().spec();
  std::ostringstream envelope, layers, gains;
  WriteChannelHeader(envelope, spec, "time_ms");
  WriteChannelHeader(layers, spec, "time_ms,layer");
  WriteChannelHeader(gains, spec, "time_ms");
  engine.set_frame_observer([&](const EnvelopeFrame& frame, const PlanTrace& trace) {
    const std::string t = Num(frame.timestamp_ms);
    WriteRow(envelope, t, frame.levels);
    WriteRow(layers, t + ",base", trace.layers.base);
    for (int i = 0; i < 4; ++i) {
      WriteRow(layers, t + ",diff" + std::to_string(i + 1), trace.layers.diff[i]);
    }
    WriteRow(gains, t, trace.gains);
  });
  const int frame = config.samples_per_frame();
  std::vector<double> padded = in.samples;
  padded.resize((padded.size() + frame - 1) / frame * frame, 0.0);
  engine.Process(padded);

  const LogMelExtractor logmel(config.sample_rate, config.calibration);
  std::ostringstream mel;
  WriteFeatureCsv(mel, logmel.Compute(in.samples));

  RunManifest m = NewManifest("analyze");
  m.config = resolved.values();
  m.dbspl_at_fullscale = config.calibration.dbspl_at_fullscale;
  m.arguments = {{"input", args.input}, {"out_dir", args.out_dir}};
  m.AddArtifact("input", args.input);
  for (const auto& [name, text] :
       {std::pair<std::string, std::string>{"envelope.csv", envelope.str()},
        {"layers.csv", layers.str()},
        {"gains.csv", gains.str()},
        {"logmel.csv", mel.str()}}) {
    const std::string path = (fs::path(args.out_dir) / name).string();
    WriteFile(path, text);
    m.AddArtifact("csv", path);
  }
  FinishManifest(m, args.manifest_path.empty()
                        ? (fs::path(args.out_dir) / "manifest.json").string()
                        : args.manifest_path);
  return m;
}

RunManifest EvaluateWith(const EvaluateArgs& args, const KeyValueConfig& resolved,
                         std::ostream& log) {
  const ExperimentConfig config = ExperimentConfigFromKeyValues(resolved);
  if (args.out_dir.empty()) throw ConfigError("evaluate needs an output directory");
  RunOptions options;
  options.out_dir = args.out_dir;
  options.jobs = args.jobs;
  options.resume = args.resume;
  options.log = [&](const std::string& line) { log << line << std::endl; };
  const ExperimentResults results = RunExperiment(config, options);
  int unreachable = 0;
  for (const ConditionResult& r : results.conditions) {
    for (const auto& srt : r.srt_snr_db) unreachable += srt ? 0 : 1;
  }
  log << results.conditions.size() << " conditions (" << results.units_computed
      << " units computed, " << results.units_loaded << " loaded) in " << Num(results.seconds)
      << " s; " << unreachable << " SRT readouts unreachable" << std::endl;

  RunManifest m = NewManifest("evaluate");
  m.config = resolved.values();
  m.seeds = config.seeds;
  m.seeds.insert(m.seeds.begin(), config.corpus_seed);
  m.dbspl_at_fullscale = config.engine.calibration.dbspl_at_fullscale;
  m.arguments = {{"experiment", args.experiment_path}, {"out_dir", args.out_dir}};
  for (const std::string& path : WriteExperimentOutputs(config, results, args.out_dir)) {
    m.AddArtifact(fs::path(path).extension().string().substr(1), path);
  }
  FinishManifest(m, (fs::path(args.out_dir) / "manifest.json").string());
  return m;
}

std::string ExperimentDefaults() {
  std::ostringstream out;
  out << "# PLATT experiment configuration defaults (the full grid). Engine keys\n"
         "# may be given as well.\n";
  for (const ConfigKey& key : ExperimentConfigKeys()) {
    out << "\n# " << key.help << '\n' << key.name << " = " << key.default_value << '\n';
  }
  return out.str();
}

}  // namespace

int ExitCodeFor(const std::exception& error) {
  if (dynamic_cast<const ConfigError*>(&error)) return kExitConfig;
  if (dynamic_cast<const IoError*>(&error)) return kExitIo;
  if (dynamic_cast<const fs::filesystem_error*>(&error)) return kExitIo;
  if (dynamic_cast<const NumericalError*>(&error)) return kExitNumerical;
  return kExitOther;
}

RunManifest RunDesign(const DesignArgs& args, std::ostream& out) {
  const FilterbankSpec spec = DesignFilterbank(args.sample_rate);
  std::ostringstream table;
  table << "channel,center_hz,bandwidth_hz,pole_radius,peak_delay_ms,max_gain_step_db\n";
  for (int c = 0; c < spec.num_channels(); ++c) {
    const ChannelSpec& ch = spec.channel(c);
    table << c << ',' << Num(ch.center_hz) << ',' << Num(ch.bandwidth_hz) << ','
          << Num(std::abs(ch.pole)) << ','
          << Num(1000.0 * ch.envelope_peak_delay / spec.sample_rate()) << ','
          << Num(ch.max_gain_step_db) << '\n';
  }
  const FlatnessReport flat = JointFlatness(spec);
  const std::vector<ChannelLatency> latency = MeasureLatency(EngineConfig::Default(args.sample_rate));
  out << table.str();
  out << "# sample_rate_hz " << Num(spec.sample_rate()) << '\n'
      << "# synthesis_scale " << Num(spec.synthesis_scale()) << '\n'
      << "# joint_flatness_150_13000_hz_db " << Num(flat.min_db) << ' ' << Num(flat.max_db)
      << " (max abs " << Num(flat.max_abs_db()) << ")\n"
      << "# latency_ms_at_800_hz " << Num(LatencyAt(latency, 800.0)) << '\n'
      << "# latency_ms_at_2000_hz " << Num(LatencyAt(latency, 2000.0)) << '\n';

  RunManifest m = NewManifest("design");
  m.arguments = {{"sample_rate", Num(args.sample_rate)}, {"csv", args.csv_path}};
  if (!args.csv_path.empty()) {
    WriteFile(args.csv_path, table.str());
    m.AddArtifact("csv", args.csv_path);
  }
  std::string manifest = args.manifest_path;
  if (manifest.empty() && !args.csv_path.empty()) manifest = args.csv_path + ".manifest.json";
  FinishManifest(m, manifest);
  return m;
}

RunManifest RunProcess(const ProcessArgs& args) {
  const Audio probe = ReadWav(args.input);
  return ProcessWith(args, ResolveEngineKeys(args.engine, probe.sample_rate));
}

RunManifest RunAnalyze(const AnalyzeArgs& args) {
  const Audio probe = ReadWav(args.input);
  return AnalyzeWith(args, ResolveEngineKeys(args.engine, probe.sample_rate));
}

RunManifest RunEvaluate(const EvaluateArgs& args, std::ostream& log) {
  KeyValueConfig given;
  if (!args.experiment_path.empty()) given = KeyValueConfig::ParseFile(args.experiment_path);
  for (const std::string& o : args.overrides) given.ApplyOverride(o);
  // Validates the keys before the resolved set is recorded.
  ExperimentConfigFromKeyValues(given);
  return EvaluateWith(args, ResolvedExperimentKeys(given), log);
}

RunManifest RunMakeFixture(const FixtureArgs& args) {
  Calibration calibration;
  calibration.dbspl_at_fullscale = args.dbspl_at_fullscale;
  Audio audio;
  audio.sample_rate = args.sample_rate;
  audio.format = SampleFormat::kFloat32;
  audio.samples = MakeFixture(args.kind, args.sample_rate, calibration);
  WriteWav(args.output, audio);
  RunManifest m = NewManifest("make-fixture");
  m.dbspl_at_fullscale = args.dbspl_at_fullscale;
  m.arguments = {{"kind", args.kind},
                 {"output", args.output},
                 {"sample_rate", Num(args.sample_rate)},
                 {"dbspl_at_fullscale", Num(args.dbspl_at_fullscale)}};
  m.AddArtifact("output", args.output);
  FinishManifest(m, args.manifest_path.empty() ? args.output + ".manifest.json"
                                               : args.manifest_path);
  return m;
}

std::vector<ArtifactCheck> Rerun(const std::string& manifest_path, const std::string& out_dir,
                                 std::ostream& log) {
  const RunManifest recorded = RunManifest::Read(manifest_path);
  if (!out_dir.empty()) fs::create_directories(out_dir);
  KeyValueConfig config;
  for (const auto& [key, value] : recorded.config) config.Set(key, value);
  for (const ArtifactRecord& a : recorded.artifacts) {
    if (a.role == "input" && HexHash(HashFile(a.path)) != a.fnv1a64) {
      throw IoError("input " + a.path + " differs from the one recorded in " + manifest_path);
    }
  }
  const auto& args = recorded.arguments;
  const std::string redirected_manifest =
      out_dir.empty() ? std::string() : Redirect(manifest_path, out_dir);
  RunManifest fresh;
  if (recorded.subcommand == "design") {
    DesignArgs a;
    a.sample_rate = ParseDoubleArg(args, "sample_rate");
    a.csv_path = Redirect(Arg(args, "csv"), out_dir);
    a.manifest_path = redirected_manifest;
    std::ostringstream sink;
    fresh = RunDesign(a, sink);
  } else if (recorded.subcommand == "process") {
    ProcessArgs a;
    a.input = Arg(args, "input");
    a.output = Redirect(Arg(args, "output"), out_dir);
    a.format = Arg(args, "format");
    a.manifest_path = redirected_manifest;
    fresh = ProcessWith(a, config);
  } else if (recorded.subcommand == "analyze") {
    AnalyzeArgs a;
    a.input = Arg(args, "input");
    a.out_dir = out_dir.empty() ? Arg(args, "out_dir") : out_dir;
    fresh = AnalyzeWith(a, config);
  } else if (recorded.subcommand == "evaluate") {
    EvaluateArgs a;
    a.experiment_path = Arg(args, "experiment");
    a.out_dir = out_dir.empty() ? Arg(args, "out_dir") : out_dir;
    a.resume = false;
    fresh = EvaluateWith(a, config, log);
  } else if (recorded.subcommand == "make-fixture") {
    FixtureArgs a;
    a.kind = Arg(args, "kind");
    a.output = Redirect(Arg(args, "output"), out_dir);
    a.sample_rate = ParseDoubleArg(args, "sample_rate");
    a.dbspl_at_fullscale = ParseDoubleArg(args, "dbspl_at_fullscale");
    a.manifest_path = redirected_manifest;
    fresh = RunMakeFixture(a);
  } else {
    throw ConfigError("manifest names unknown subcommand '" + recorded.subcommand + "'");
  }
  std::vector<ArtifactCheck> checks;
  for (const ArtifactRecord& a : recorded.artifacts) {
    if (a.role == "input") continue;
    ArtifactCheck check{a.role, a.path, a.fnv1a64, "missing"};
    const std::string name = fs::path(a.path).filename().string();
    for (const ArtifactRecord& f : fresh.artifacts) {
      if (fs::path(f.path).filename().string() == name) {
        check.path = f.path;
        check.actual = f.fnv1a64;
      }
    }
    checks.push_back(check);
  }
  return checks;
}

int CliMain(int argc, char** argv) {
  CLI::App app{"PLATT: spectro-temporal level expansion for hearing devices"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  DesignArgs design_args;
  bool dump_defaults = false;
  bool dump_experiment = false;
  CLI::App* design = app.add_subcommand("design", "Print the filterbank channel table");
  design->add_option("--sample-rate", design_args.sample_rate, "Sample rate in Hz");
  design->add_option("--csv", design_args.csv_path, "Also write the channel table as CSV");
  design->add_option("--manifest", design_args.manifest_path, "Manifest path");
  design->add_flag("--dump-defaults", dump_defaults, "Print engine config defaults and exit");
  design->add_flag("--dump-experiment-defaults", dump_experiment,
                   "Print experiment config defaults and exit");

  const auto add_engine_options = [](CLI::App* cmd, EngineArgs& engine) {
    cmd->add_option("--config", engine.config_path, "Engine config file (all keys required)");
    cmd->add_option("--set", engine.overrides, "Override a config key: key=value");
    cmd->add_option("-k,--expansion", engine.expansion, "Expansion factor k (PLATT-k)");
  };

  ProcessArgs process_args;
  CLI::App* process = app.add_subcommand("process", "Process a mono WAV file with PLATT-k");
  process->add_option("input", process_args.input, "Input WAV")->required();
  process->add_option("output", process_args.output, "Output WAV")->required();
  add_engine_options(process, process_args.engine);
  process->add_option("--format", process_args.format, "pcm16, pcm24 or float32");
  process->add_option("--manifest", process_args.manifest_path, "Manifest path");

  AnalyzeArgs analyze_args;
  CLI::App* analyze = app.add_subcommand("analyze", "Dump envelope, layers, gains and log Mel");
  analyze->add_option("input", analyze_args.input, "Input WAV")->required();
  analyze->add_option("-o,--out-dir", analyze_args.out_dir, "Output directory")->required();
  add_engine_options(analyze, analyze_args.engine);
  analyze->add_option("--manifest", analyze_args.manifest_path, "Manifest path");

  EvaluateArgs evaluate_args;
  bool no_resume = false;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Run the recognition experiment");
  evaluate->add_option("-e,--experiment", evaluate_args.experiment_path, "Experiment config");
  evaluate->add_option("--set", evaluate_args.overrides, "Override a config key: key=value");
  evaluate->add_option("-o,--out-dir", evaluate_args.out_dir, "Output directory")->required();
  evaluate->add_option("-j,--jobs", evaluate_args.jobs, "Work units run in parallel")
      ->check(CLI::PositiveNumber);
  evaluate->add_flag("--no-resume", no_resume, "Recompute cached work units");

  FixtureArgs fixture_args;
  CLI::App* fixture = app.add_subcommand("make-fixture", "Write a test signal");
  fixture->add_option("kind", fixture_args.kind, "tone, two-tone or noisy")->required();
  fixture->add_option("output", fixture_args.output, "Output WAV")->required();
  fixture->add_option("--sample-rate", fixture_args.sample_rate, "Sample rate in Hz");
  fixture->add_option("--manifest", fixture_args.manifest_path, "Manifest path");

  std::string rerun_manifest, rerun_dir;
  CLI::App* rerun = app.add_subcommand("rerun", "Repeat a run from its manifest and compare");
  rerun->add_option("manifest", rerun_manifest, "Manifest JSON")->required();
  rerun->add_option("-o,--out-dir", rerun_dir, "Write outputs here instead of in place");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (design->parsed()) {
      if (dump_defaults) {
        std::cout << DumpDefaults();
      } else if (dump_experiment) {
        std::cout << ExperimentDefaults();
      } else {
        RunDesign(design_args, std::cout);
      }
    } else if (process->parsed()) {
      RunProcess(process_args);
    } else if (analyze->parsed()) {
      RunAnalyze(analyze_args);
    } else if (evaluate->parsed()) {
      evaluate_args.resume = !no_resume;
      RunEvaluate(evaluate_args, std::cerr);
    } else if (fixture->parsed()) {
      RunMakeFixture(fixture_args);
    } else if (rerun->parsed()) {
      bool all = true;
      for (const ArtifactCheck& c : Rerun(rerun_manifest, rerun_dir, std::cerr)) {
        std::cout << (c.match() ? "match    " : "MISMATCH ") << c.role << ' ' << c.path << '\n';
        all = all && c.match();
      }
      return all ? kExitOk : kExitOther;
    }
  } catch (const std::exception& e) {
    std::cerr << "platt: error: " << e.what() << '\n';
    return ExitCodeFor(e);
  }
  return kExitOk;
}

}  // namespace platt
