#ifndef PLATT_EXPERIMENT_H_
#define PLATT_EXPERIMENT_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "platt/config.h"
#include "platt/corpus.h"
#include "platt/engine.h"
#include "platt/evaluation.h"
#include "platt/hearing_sim.h"
#include "platt/recognizer.h"

namespace platt {

// Unaided listening (expansion 0) or PLATT-k processing.
struct Compensation {
  double expansion = 0.0;

  bool aided() const { return expansion > 0.0; }
  // "none" or "PLATT-<k>".
  std::string Name() const;
  static Compensation Parse(const std::string& name);
  bool operator==(const Compensation&) const = default;
};

struct ExperimentConfig {
  CorpusConfig corpus;
  uint64_t corpus_seed = 1;
  StreamLayout layout;
  std::vector<MaskerKind> maskers;
  std::vector<double> levels;  // noise presentation levels, dB SPL
  std::vector<HearingProfile> profiles;
  std::vector<Compensation> compensations;
  std::vector<uint64_t> seeds;
  double snr_min_db = -30.0;
  double snr_max_db = 12.0;
  double snr_step_db = 3.0;
  std::vector<double> targets;         // recognition rates for SRT readout
  std::vector<double> benefit_levels;  // levels averaged in the benefit table
  RecognizerConfig recognizer;
  EngineConfig engine;  // expansion is set per compensation

  std::vector<double> Snrs() const;
  int slot_frames() const;
  int token_frames() const;
  // Throws ConfigError on an inconsistent configuration.
  void Validate() const;
  // Hash of every setting that affects one work unit's results.
  uint64_t Fingerprint() const;
};

// Keys of the experiment file with their defaults (the full grid).
const std::vector<ConfigKey>& ExperimentConfigKeys();
// Experiment keys plus engine keys; missing keys take their defaults.
ExperimentConfig ExperimentConfigFromKeyValues(const KeyValueConfig& values);
// Experiment and engine keys, resolved, for manifests.
KeyValueConfig ResolvedExperimentKeys(const KeyValueConfig& values);

struct ConditionKey {
  MaskerKind masker = MaskerKind::kStationary;
  double level_dbspl = 0.0;
  HearingProfile profile;
  Compensation compensation;
  uint64_t seed = 0;
};

struct ConditionResult {
  ConditionKey key;
  RecognitionMap map;
  std::vector<std::optional<double>> srt_snr_db;  // per target; empty if unreachable
};

// A work unit covers every profile and compensation of one masker, level
// and seed; the speech tokens and masker excerpts are shared by all of them,
// so aided and unaided results are paired.
struct UnitKey {
  MaskerKind masker = MaskerKind::kStationary;
  double level_dbspl = 0.0;
  uint64_t seed = 0;

  std::string Id() const;
};

std::vector<UnitKey> WorkUnits(const ExperimentConfig& config);
std::vector<ConditionResult> RunUnit(const ExperimentConfig& config,
                                     const SyntheticCorpus& corpus, const UnitKey& unit);

// Seeds derived from a unit; stable under changes of the other grid axes.
uint64_t TokenSeed(const UnitKey& unit, double snr_db);
uint64_t ProfileSeed(const UnitKey& unit, double snr_db, const HearingProfile& profile);

struct RunOptions {
  std::string out_dir;  // unit results are cached in <out_dir>/units
  int jobs = 1;
  bool resume = true;
  std::function<void(const std::string&)> log;
};

struct ExperimentResults {
  std::vector<ConditionResult> conditions;
  int units_computed = 0;
  int units_loaded = 0;
  double seconds = 0.0;
};

ExperimentResults RunExperiment(const ExperimentConfig& config, const RunOptions& options);

// Mean over seeds of the SRT at `target`, in dB SPL (noise level + SNR).
struct PlompPoint {
  MaskerKind masker;
  HearingProfile profile;
  Compensation compensation;
  double level_dbspl;
  double target;
  Summary srt_dbspl;
  int unreachable = 0;
};
std::vector<PlompPoint> PlompCurves(const ExperimentConfig& config,
                                    const ExperimentResults& results, double target);

// Per seed, unaided minus aided SRT-50 averaged over the benefit levels;
// summarized over seeds. Seeds with an unreachable SRT are counted as
// missing.
struct BenefitRow {
  MaskerKind masker;
  HearingProfile profile;
  Compensation compensation;
  Summary benefit_db;
  int missing = 0;
};
std::vector<BenefitRow> BenefitTable(const ExperimentConfig& config,
                                     const ExperimentResults& results);

// Writes results.csv, plomp.csv, benefit.csv, psychometric.csv,
// envelopes.csv, results.json and one Plomp SVG per masker and
// compensation. Returns the paths written.
std::vector<std::string> WriteExperimentOutputs(const ExperimentConfig& config,
                                                const ExperimentResults& results,
                                                const std::string& out_dir);

}  // namespace platt

#endif  // PLATT_EXPERIMENT_H_
