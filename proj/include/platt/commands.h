#ifndef PLATT_COMMANDS_H_
#define PLATT_COMMANDS_H_

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "platt/config.h"
#include "platt/manifest.h"

namespace platt {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitOther = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNumerical = 4;

// Maps an exception to its exit code.
int ExitCodeFor(const std::exception& error);

// Subcommands. Each writes its outputs plus one manifest and returns the
// manifest; a manifest path left empty means <primary output>.manifest.json
// (or manifest.json inside an output directory).

struct DesignArgs {
  double sample_rate = kDefaultSampleRate;
  std::string csv_path;       // channel table; none if empty
  std::string manifest_path;  // defaults next to the CSV; none without either
};
// Prints the channel table and flatness and latency figures to `out`.
RunManifest RunDesign(const DesignArgs& args, std::ostream& out);

// Engine settings shared by process and analyze: an optional config file
// (then every engine key must be present), then --set overrides, then -k.
// Without a file or an explicit sample_rate the input's rate is used.
struct EngineArgs {
  std::string config_path;
  std::vector<std::string> overrides;  // "key=value"
  std::optional<double> expansion;
};

struct ProcessArgs {
  std::string input;
  std::string output;
  EngineArgs engine;
  std::string format;  // pcm16, pcm24 or float32; same as the input if empty
  std::string manifest_path;
};
RunManifest RunProcess(const ProcessArgs& args);

// envelope.csv (one row per started 1 ms frame; the last partial frame is
// completed with silence), layers.csv, gains.csv and logmel.csv.
struct AnalyzeArgs {
  std::string input;
  std::string out_dir;
  EngineArgs engine;
  std::string manifest_path;
};
RunManifest RunAnalyze(const AnalyzeArgs& args);

struct EvaluateArgs {
  std::string experiment_path;  // defaults for every key if empty
  std::vector<std::string> overrides;
  std::string out_dir;
  int jobs = 1;
  bool resume = true;
};
RunManifest RunEvaluate(const EvaluateArgs& args, std::ostream& log);

struct FixtureArgs {
  std::string kind;
  std::string output;
  double sample_rate = kDefaultSampleRate;
  double dbspl_at_fullscale = 110.0;
  std::string manifest_path;
};
RunManifest RunMakeFixture(const FixtureArgs& args);

struct ArtifactCheck {
  std::string role;
  std::string path;
  std::string expected;
  std::string actual;
  bool match() const { return expected == actual; }
};

// Re-executes the subcommand recorded in a manifest, with outputs moved
// into `out_dir` when given (in place otherwise), and compares every output
// hash with the recorded one. Throws IoError if an input has changed.
std::vector<ArtifactCheck> Rerun(const std::string& manifest_path, const std::string& out_dir,
                                 std::ostream& log);

// Full command line: parses, dispatches and maps errors to exit codes.
int CliMain(int argc, char** argv);

}  // namespace platt

#endif  // PLATT_COMMANDS_H_
