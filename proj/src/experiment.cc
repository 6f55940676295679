#include "platt/experiment.h"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "json.hpp"
#include "platt/manifest.h"

namespace platt {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string FormatNumber(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::vector<uint64_t> ParseSeeds(const KeyValueConfig& values, const std::string& key) {
  std::vector<uint64_t> seeds;
  for (double v : values.GetDoubleList(key)) {
    if (v < 0 || v != std::floor(v) || v > 9.0e15) {
      throw ConfigError("config key '" + key + "' needs non-negative integers");
    }
    seeds.push_back(static_cast<uint64_t>(v));
  }
  return seeds;
}

int GetInt(const KeyValueConfig& values, const std::string& key) {
  const double v = values.GetDouble(key);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw ConfigError("config key '" + key + "' needs an integer");
  }
  return static_cast<int>(v);
}

KeyValueConfig WithDefaults(const KeyValueConfig& values) {
  KeyValueConfig merged;
  for (const ConfigKey& k : EngineConfigKeys()) merged.Set(k.name, k.default_value);
  for (const ConfigKey& k : ExperimentConfigKeys()) merged.Set(k.name, k.default_value);
  for (const auto& [key, value] : values.values()) merged.Set(key, value);
  return merged;
}

int64_t SnrKey(double snr_db) { return std::llround(snr_db * 1000.0); }

}  // namespace

std::string Compensation::Name() const {
  return aided() ? "PLATT-" + FormatNumber(expansion) : "none";
}

Compensation Compensation::Parse(const std::string& name) {
  if (name == "none") return {};
  const auto fail = [&]() {
    return ConfigError("invalid compensation '" + name + "' (none or PLATT-<k>, 1 <= k <= 16)");
  };
  if (name.rfind("PLATT-", 0) != 0) throw fail();
  const std::string k = name.substr(6);
  size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(k, &used);
  } catch (const std::exception&) {
    throw fail();
  }
  if (used != k.size() || !(value >= 1.0 && value <= 16.0)) throw fail();
  return {value};
}

std::vector<double> ExperimentConfig::Snrs() const {
  std::vector<double> snrs;
  const int count = static_cast<int>(std::floor((snr_max_db - snr_min_db) / snr_step_db + 1e-9));
  for (int i = 0; i <= count; ++i) snrs.push_back(snr_min_db + i * snr_step_db);
  return snrs;
}

int ExperimentConfig::slot_frames() const {
  return static_cast<int>(std::lround(layout.slot_ms / 10.0));
}

int ExperimentConfig::token_frames() const {
  return static_cast<int>(std::floor(corpus.word_ms / 10.0));
}

void ExperimentConfig::Validate() const {
  engine.Validate();
  if (corpus.sample_rate != engine.sample_rate) {
    throw ConfigError("corpus and engine sample rates differ");
  }
  if (maskers.empty() || levels.empty() || profiles.empty() || compensations.empty() ||
      seeds.empty()) {
    throw ConfigError("maskers, levels, profiles, compensations and seeds must be non-empty");
  }
  for (double level : levels) {
    if (!(level >= 0.0 && level <= 100.0) || std::fmod(level, 10.0) != 0.0) {
      throw ConfigError("presentation levels must come from 0, 10, ..., 100 dB SPL");
    }
  }
  if (!(snr_step_db > 0.0) || !(snr_max_db > snr_min_db)) {
    throw ConfigError("SNR grid needs min < max and a positive step");
  }
  if (snr_min_db > -30.0 || Snrs().back() < 10.0) {
    throw ConfigError("SNR grid must cover at least -30 to +10 dB");
  }
  if (corpus.num_words < 10) throw ConfigError("the vocabulary needs at least 10 words");
  if (layout.tokens < 100) throw ConfigError("each map cell needs at least 100 test tokens");
  if (layout.tokens < 3 * corpus.num_words) {
    throw ConfigError("insufficient tokens: at least three per word are required");
  }
  if (std::abs(layout.slot_ms / 10.0 - slot_frames()) > 1e-9) {
    throw ConfigError("token slot must be a multiple of the 10 ms frame shift");
  }
  if (targets.empty()) throw ConfigError("at least one SRT target is required");
  const double chance = 1.0 / corpus.num_words;
  for (double t : targets) {
    if (!(t > chance && t < 1.0)) {
      throw ConfigError("SRT targets must lie between chance and 1, got " + FormatNumber(t));
    }
  }
  if (std::find(targets.begin(), targets.end(), 0.5) == targets.end()) {
    throw ConfigError("SRT targets must include 0.5");
  }
  for (double level : benefit_levels) {
    if (std::find(levels.begin(), levels.end(), level) == levels.end()) {
      throw ConfigError("benefit level " + FormatNumber(level) + " is not a presentation level");
    }
  }
}

uint64_t ExperimentConfig::Fingerprint() const {
  std::ostringstream s;
  s.precision(17);
  s << corpus.num_words << ' ' << corpus.sample_rate << ' ' << corpus.word_ms << ' '
    << corpus.masker_length << ' ' << corpus.min_on_ms << ' ' << corpus.max_on_ms << ' '
    << corpus.max_gap_ms << ' ' << corpus_seed << ' ' << layout.slot_ms << ' '
    << layout.word_offset_ms << ' ' << layout.tokens << ' ' << snr_min_db << ' ' << snr_max_db
    << ' ' << snr_step_db << ' ' << recognizer.shrinkage << ' ' << recognizer.variance_floor_db2
    << ' ' << engine.calibration.dbspl_at_fullscale << ' ' << engine.envelope.hold_ms << ' '
    << engine.envelope.decay_db_per_ms << ' ' << static_cast<int>(engine.platt.base_map);
  for (int c = 0; c < kNumChannels; ++c) {
    s << ' ' << engine.platt.input_dr.lower[c] << ' ' << engine.platt.input_dr.upper[c] << ' '
      << engine.platt.output_dr.lower[c] << ' ' << engine.platt.output_dr.upper[c];
  }
  for (int w : engine.platt.smoothing_widths) s << ' ' << w;
  for (int f : engine.platt.propagation_fwhm) s << ' ' << f;
  for (const HearingProfile& p : profiles) s << ' ' << p.Name();
  for (const Compensation& c : compensations) s << ' ' << c.Name();
  for (double t : targets) s << ' ' << t;
  return Fnv1a64(s.str());
}

const std::vector<ConfigKey>& ExperimentConfigKeys() {
  static const std::vector<ConfigKey> keys = {
      {"experiment.maskers", "stationary, fluctuating", "stationary and/or fluctuating"},
      {"experiment.levels", "0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100",
       "noise presentation levels in dB SPL"},
      {"experiment.profiles", "P-none-0, grid",
       "profile names P-<limit Hz|none>-<uncertainty dB>; 'grid' adds the 16 hearing-loss profiles"},
      {"experiment.compensations", "none, PLATT-2, PLATT-4, PLATT-6, PLATT-8",
       "none and/or PLATT-<k>"},
      {"experiment.seeds", "1, 2, 3, 4, 5", "run seeds; one replication each"},
      {"experiment.snr_min", "-30", "lowest SNR of the train/test grid, dB"},
      {"experiment.snr_max", "12", "highest SNR of the grid, dB"},
      {"experiment.snr_step", "3", "grid spacing, dB"},
      {"experiment.targets", "0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9",
       "recognition rates at which SRTs are read out"},
      {"experiment.benefit_levels", "70, 80, 90", "levels averaged in the benefit table"},
      {"corpus.seed", "1", "seed of the vocabulary and maskers"},
      {"corpus.words", "10", "vocabulary size (>= 10)"},
      {"corpus.tokens", "100", "tokens per SNR and condition (>= 100)"},
      {"corpus.masker_length", "4194304", "masker length in samples"},
      {"recognizer.shrinkage", "1", "weight of the pooled variance (1: tied variances)"},
      {"recognizer.variance_floor", "1", "variance floor in dB^2"},
  };
  return keys;
}

KeyValueConfig ResolvedExperimentKeys(const KeyValueConfig& values) {
  return WithDefaults(values);
}

ExperimentConfig ExperimentConfigFromKeyValues(const KeyValueConfig& values) {
  const KeyValueConfig merged = WithDefaults(values);
  for (const auto& [key, value] : values.values()) {
    bool known = false;
    for (const ConfigKey& k : EngineConfigKeys()) known |= key == k.name;
    for (const ConfigKey& k : ExperimentConfigKeys()) known |= key == k.name;
    if (!known) throw ConfigError("unknown config key '" + key + "'");
  }
  ExperimentConfig config;
  config.engine = EngineConfigFromKeyValues(merged, false);
  config.engine.platt.expansion = 1.0;
  config.corpus.sample_rate = config.engine.sample_rate;
  config.corpus.num_words = GetInt(merged, "corpus.words");
  config.corpus.masker_length = GetInt(merged, "corpus.masker_length");
  config.corpus_seed = ParseSeeds(merged, "corpus.seed").at(0);
  config.layout.tokens = GetInt(merged, "corpus.tokens");
  for (const std::string& m : merged.GetList("experiment.maskers")) {
    config.maskers.push_back(ParseMasker(m));
  }
  config.levels = merged.GetDoubleList("experiment.levels");
  for (const std::string& p : merged.GetList("experiment.profiles")) {
    if (p == "grid") {
      for (const HearingProfile& g : HearingProfile::StandardGrid()) config.profiles.push_back(g);
    } else {
      config.profiles.push_back(HearingProfile::Parse(p));
    }
  }
  for (const std::string& c : merged.GetList("experiment.compensations")) {
    config.compensations.push_back(Compensation::Parse(c));
  }
  config.seeds = ParseSeeds(merged, "experiment.seeds");
  config.snr_min_db = merged.GetDouble("experiment.snr_min");
  config.snr_max_db = merged.GetDouble("experiment.snr_max");
  config.snr_step_db = merged.GetDouble("experiment.snr_step");
  config.targets = merged.GetDoubleList("experiment.targets");
  config.benefit_levels = merged.GetDoubleList("experiment.benefit_levels");
  config.recognizer.shrinkage = merged.GetDouble("recognizer.shrinkage");
  config.recognizer.variance_floor_db2 = merged.GetDouble("recognizer.variance_floor");
  config.Validate();
  return config;
}

std::string UnitKey::Id() const {
  return MaskerName(masker) + "-L" + FormatNumber(level_dbspl) + "-s" + std::to_string(seed);
}

std::vector<UnitKey> WorkUnits(const ExperimentConfig& config) {
  std::vector<UnitKey> units;
  for (MaskerKind m : config.maskers) {
    for (double level : config.levels) {
      for (uint64_t seed : config.seeds) units.push_back({m, level, seed});
    }
  }
  return units;
}

uint64_t TokenSeed(const UnitKey& unit, double snr_db) {
  uint64_t s = MixSeed(unit.seed, 0x70CE);
  s = MixSeed(s, static_cast<uint64_t>(unit.masker));
  return MixSeed(s, static_cast<uint64_t>(SnrKey(snr_db)));
}

uint64_t ProfileSeed(const UnitKey& unit, double snr_db, const HearingProfile& profile) {
  uint64_t s = MixSeed(TokenSeed(unit, snr_db), static_cast<uint64_t>(SnrKey(unit.level_dbspl)));
  return MixSeed(s, Fnv1a64(profile.Name()));
}

std::vector<ConditionResult> RunUnit(const ExperimentConfig& config,
                                     const SyntheticCorpus& corpus, const UnitKey& unit) {
  const std::vector<double> snrs = config.Snrs();
  const int num_snrs = static_cast<int>(snrs.size());
  const int tokens = config.layout.tokens;
  const int slot_frames = config.slot_frames();
  const int token_frames = config.token_frames();
  const Calibration& cal = config.engine.calibration;
  const LogMelExtractor logmel(config.engine.sample_rate, cal);
  const std::vector<double> floor = ThresholdFloor(logmel.center_hz());

  std::vector<PlattConfig> variants;
  std::vector<int> variant_of(config.compensations.size(), -1);
  for (size_t i = 0; i < config.compensations.size(); ++i) {
    if (!config.compensations[i].aided()) continue;
    PlattConfig p = config.engine.platt;
    p.expansion = config.compensations[i].expansion;
    variant_of[i] = static_cast<int>(variants.size());
    variants.push_back(p);
  }

  // Threshold-floored token frames per compensation and SNR.
  const auto token_features = [&](std::span<const double> audio) {
    const FeatureMatrix full = ApplyThresholdFloor(logmel.Compute(audio), floor);
    FeatureMatrix out(tokens * token_frames, full.channels, full.frame_shift_ms,
                      full.center_hz);
    for (int t = 0; t < tokens; ++t) {
      const double* src = full.data.data() + static_cast<size_t>(t) * slot_frames * full.channels;
      std::copy(src, src + static_cast<size_t>(token_frames) * full.channels,
                out.data.begin() + static_cast<size_t>(t) * token_frames * full.channels);
    }
    return out;
  };
  std::vector<std::vector<FeatureMatrix>> features(
      config.compensations.size(), std::vector<FeatureMatrix>(num_snrs));
  std::vector<int> labels;
  for (int i = 0; i < num_snrs; ++i) {
    const StreamSpec spec{unit.masker, unit.level_dbspl, snrs[i], TokenSeed(unit, snrs[i])};
    const MixtureStream stream = BuildStream(corpus, config.layout, spec, cal);
    labels = stream.labels;
    std::vector<std::vector<double>> processed;
    if (!variants.empty()) {
      EngineBank bank(config.engine, variants);
      processed = bank.Process(stream.audio);
    }
    for (size_t c = 0; c < config.compensations.size(); ++c) {
      features[c][i] = token_features(variant_of[c] < 0 ? std::span<const double>(stream.audio)
                                                        : processed[variant_of[c]]);
    }
  }

  std::vector<ConditionResult> results;
  std::vector<Eigen::MatrixXd> matrices(num_snrs);
  for (size_t c = 0; c < config.compensations.size(); ++c) {
    for (const HearingProfile& profile : config.profiles) {
      for (int i = 0; i < num_snrs; ++i) {
        const FeatureMatrix listened = ApplyProfile(features[c][i], profile, floor,
                                                    ProfileSeed(unit, snrs[i], profile));
        matrices[i] = TokenMatrix(listened, tokens, token_frames, token_frames);
      }
      ConditionResult r;
      r.key = {unit.masker, unit.level_dbspl, profile, config.compensations[c], unit.seed};
      r.map = BuildRecognitionMap(snrs, matrices, labels, config.corpus.num_words,
                                  config.recognizer);
      for (double target : config.targets) r.srt_snr_db.push_back(SrtFromMap(r.map, target));
      results.push_back(std::move(r));
    }
  }
  return results;
}

namespace {

Json ConditionToJson(const ConditionResult& r) {
  Json j;
  j["masker"] = MaskerName(r.key.masker);
  j["level_dbspl"] = r.key.level_dbspl;
  j["profile"] = r.key.profile.Name();
  j["compensation"] = r.key.compensation.Name();
  j["seed"] = r.key.seed;
  Json srt = Json::array();
  for (const auto& s : r.srt_snr_db) srt.push_back(s ? Json(*s) : Json(nullptr));
  j["srt_snr_db"] = srt;
  Json acc = Json::array();
  for (Eigen::Index i = 0; i < r.map.accuracy.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < r.map.accuracy.cols(); ++k) row.push_back(r.map.accuracy(i, k));
    acc.push_back(row);
  }
  j["snrs"] = r.map.snrs;
  j["accuracy"] = acc;
  return j;
}

ConditionResult ConditionFromJson(const Json& j) {
  ConditionResult r;
  r.key.masker = ParseMasker(j.at("masker").get<std::string>());
  r.key.level_dbspl = j.at("level_dbspl").get<double>();
  r.key.profile = HearingProfile::Parse(j.at("profile").get<std::string>());
  r.key.compensation = Compensation::Parse(j.at("compensation").get<std::string>());
  r.key.seed = j.at("seed").get<uint64_t>();
  for (const Json& s : j.at("srt_snr_db")) {
    r.srt_snr_db.push_back(s.is_null() ? std::nullopt : std::optional<double>(s.get<double>()));
  }
  r.map.snrs = j.at("snrs").get<std::vector<double>>();
  const Json& acc = j.at("accuracy");
  r.map.accuracy.resize(static_cast<Eigen::Index>(acc.size()),
                        static_cast<Eigen::Index>(r.map.snrs.size()));
  for (size_t i = 0; i < acc.size(); ++i) {
    for (size_t k = 0; k < r.map.snrs.size(); ++k) r.map.accuracy(i, k) = acc[i].at(k).get<double>();
  }
  return r;
}

void WriteText(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp);
    out << text;
    if (!out) throw IoError("write failed for " + tmp);
  }
  fs::rename(tmp, path);
}

std::optional<std::vector<ConditionResult>> LoadUnit(const std::string& path,
                                                     uint64_t fingerprint) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    const Json j = Json::parse(in);
    if (j.at("fingerprint").get<std::string>() != HexHash(fingerprint)) return std::nullopt;
    std::vector<ConditionResult> out;
    for (const Json& c : j.at("conditions")) out.push_back(ConditionFromJson(c));
    return out;
  } catch (const std::exception&) {
    return std::nullopt;  // stale or truncated cache entries are recomputed
  }
}

}  // namespace

ExperimentResults RunExperiment(const ExperimentConfig& config, const RunOptions& options) {
  config.Validate();
  const auto start = std::chrono::steady_clock::now();
  const auto log = [&](const std::string& msg) {
    if (options.log) options.log(msg);
  };
  const std::vector<UnitKey> units = WorkUnits(config);
  const uint64_t fingerprint = config.Fingerprint();
  std::string unit_dir;
  if (!options.out_dir.empty()) {
    unit_dir = (fs::path(options.out_dir) / "units").string();
    fs::create_directories(unit_dir);
  }
  const auto unit_path = [&](const UnitKey& u) {
    return (fs::path(unit_dir) / (u.Id() + ".json")).string();
  };

  std::vector<std::optional<std::vector<ConditionResult>>> done(units.size());
  ExperimentResults results;
  std::vector<size_t> pending;
  for (size_t i = 0; i < units.size(); ++i) {
    if (!unit_dir.empty() && options.resume) done[i] = LoadUnit(unit_path(units[i]), fingerprint);
    if (done[i]) {
      ++results.units_loaded;
    } else {
      pending.push_back(i);
    }
  }
  if (results.units_loaded > 0) log("resumed " + std::to_string(results.units_loaded) + " units");

  const SyntheticCorpus corpus = pending.empty()
                                     ? SyntheticCorpus{}
                                     : GenerateCorpus(config.corpus, config.corpus_seed);
  std::mutex mutex;
  std::exception_ptr failure;
  int finished = 0;
  const int jobs = std::max(1, options.jobs);
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
  for (size_t p = 0; p < pending.size(); ++p) {
    {
      std::lock_guard<std::mutex> lock(mutex);
      if (failure) continue;
    }
    const UnitKey& unit = units[pending[p]];
    try {
      std::vector<ConditionResult> r = RunUnit(config, corpus, unit);
      if (!unit_dir.empty()) {
        Json j;
        j["fingerprint"] = HexHash(fingerprint);
        j["unit"] = unit.Id();
        Json conditions = Json::array();
        for (const ConditionResult& c : r) conditions.push_back(ConditionToJson(c));
        j["conditions"] = conditions;
        WriteText(unit_path(unit), j.dump());
      }
      std::lock_guard<std::mutex> lock(mutex);
      done[pending[p]] = std::move(r);
      ++finished;
      log("unit " + unit.Id() + " done (" + std::to_string(finished) + "/" +
          std::to_string(pending.size()) + ")");
    } catch (...) {
      std::lock_guard<std::mutex> lock(mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  results.units_computed = static_cast<int>(pending.size());
  for (auto& d : done) {
    for (ConditionResult& c : *d) results.conditions.push_back(std::move(c));
  }
  results.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return results;
}

namespace {

size_t TargetIndex(const ExperimentConfig& config, double target) {
  const auto it = std::find(config.targets.begin(), config.targets.end(), target);
  if (it == config.targets.end()) throw ConfigError("target not in the experiment");
  return static_cast<size_t>(it - config.targets.begin());
}

// Results indexed by (masker, profile, compensation, level, seed).
using ConditionIndex =
    std::map<std::tuple<int, std::string, std::string, double, uint64_t>, const ConditionResult*>;

ConditionIndex Index(const ExperimentResults& results) {
  ConditionIndex index;
  for (const ConditionResult& r : results.conditions) {
    index[{static_cast<int>(r.key.masker), r.key.profile.Name(), r.key.compensation.Name(),
           r.key.level_dbspl, r.key.seed}] = &r;
  }
  return index;
}

const ConditionResult& Lookup(const ConditionIndex& index, MaskerKind m, const HearingProfile& p,
                              const Compensation& c, double level, uint64_t seed) {
  const auto it = index.find({static_cast<int>(m), p.Name(), c.Name(), level, seed});
  if (it == index.end()) {
    throw ConfigError("missing result for " + MaskerName(m) + " " + p.Name() + " " + c.Name() +
                      " at " + FormatNumber(level) + " dB SPL");
  }
  return *it->second;
}

}  // namespace

std::vector<PlompPoint> PlompCurves(const ExperimentConfig& config,
                                    const ExperimentResults& results, double target) {
  const size_t t = TargetIndex(config, target);
  const ConditionIndex index = Index(results);
  std::vector<PlompPoint> points;
  for (MaskerKind m : config.maskers) {
    for (const HearingProfile& p : config.profiles) {
      for (const Compensation& c : config.compensations) {
        for (double level : config.levels) {
          PlompPoint point{m, p, c, level, target, {}, 0};
          std::vector<double> values;
          for (uint64_t seed : config.seeds) {
            const auto& srt = Lookup(index, m, p, c, level, seed).srt_snr_db[t];
            if (srt) {
              values.push_back(level + *srt);
            } else {
              ++point.unreachable;
            }
          }
          point.srt_dbspl = Summarize(values);
          points.push_back(point);
        }
      }
    }
  }
  return points;
}

std::vector<BenefitRow> BenefitTable(const ExperimentConfig& config,
                                     const ExperimentResults& results) {
  if (config.benefit_levels.empty()) return {};
  const size_t t = TargetIndex(config, 0.5);
  const ConditionIndex index = Index(results);
  const Compensation unaided{};
  if (std::find(config.compensations.begin(), config.compensations.end(), unaided) ==
      config.compensations.end()) {
    return {};
  }
  std::vector<BenefitRow> rows;
  for (MaskerKind m : config.maskers) {
    for (const HearingProfile& p : config.profiles) {
      for (const Compensation& c : config.compensations) {
        if (!c.aided()) continue;
        BenefitRow row{m, p, c, {}, 0};
        std::vector<double> values;
        for (uint64_t seed : config.seeds) {
          std::map<double, double> u, a;
          bool complete = true;
          for (double level : config.benefit_levels) {
            const auto& su = Lookup(index, m, p, unaided, level, seed).srt_snr_db[t];
            const auto& sa = Lookup(index, m, p, c, level, seed).srt_snr_db[t];
            if (!su || !sa) {
              complete = false;
              break;
            }
            u[level] = *su;
            a[level] = *sa;
          }
          if (complete) {
            values.push_back(MeanBenefit(u, a, config.benefit_levels));
          } else {
            ++row.missing;
          }
        }
        row.benefit_db = Summarize(values);
        rows.push_back(row);
      }
    }
  }
  return rows;
}

namespace {

std::string Optional(const std::optional<double>& v) { return v ? FormatNumber(*v) : ""; }

std::string PlompSvg(const ExperimentConfig& config, const std::vector<PlompPoint>& points,
                     MaskerKind masker, const Compensation& comp) {
  constexpr double kW = 640, kH = 480, kLeft = 60, kRight = 150, kTop = 30, kBottom = 50;
  const double x0 = *std::min_element(config.levels.begin(), config.levels.end());
  const double x1 = std::max(x0 + 10.0, *std::max_element(config.levels.begin(), config.levels.end()));
  double y0 = 1e300, y1 = -1e300;
  for (const PlompPoint& p : points) {
    if (p.masker != masker || !(p.compensation == comp) || p.srt_dbspl.n == 0) continue;
    y0 = std::min(y0, p.srt_dbspl.mean);
    y1 = std::max(y1, p.srt_dbspl.mean);
  }
  if (y0 > y1) {
    y0 = 0.0;
    y1 = 100.0;
  }
  y0 = 10.0 * std::floor(y0 / 10.0);
  y1 = std::max(y0 + 10.0, 10.0 * std::ceil(y1 / 10.0));
  const auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * (kW - kLeft - kRight); };
  const auto py = [&](double y) { return kH - kBottom - (y - y0) / (y1 - y0) * (kH - kTop - kBottom); };
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<text x=\"" << kLeft << "\" y=\"18\">Plomp curves, " << MaskerName(masker)
      << " masker, " << comp.Name() << "</text>\n";
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kW - kLeft - kRight
      << "\" height=\"" << kH - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double x = x0; x <= x1 + 1e-9; x += 10.0) {
    svg << "<text x=\"" << px(x) - 8 << "\" y=\"" << kH - kBottom + 15 << "\">" << x
        << "</text>\n";
  }
  for (double y = y0; y <= y1 + 1e-9; y += 10.0) {
    svg << "<text x=\"" << kLeft - 30 << "\" y=\"" << py(y) + 4 << "\">" << y << "</text>\n";
  }
  svg << "<text x=\"" << px((x0 + x1) / 2) - 60 << "\" y=\"" << kH - 12
      << "\">noise level / dB SPL</text>\n";
  svg << "<text x=\"14\" y=\"" << py((y0 + y1) / 2) + 40
      << "\" transform=\"rotate(-90 14 " << py((y0 + y1) / 2) + 40
      << ")\">SRT / dB SPL</text>\n";
  int series = 0;
  for (const HearingProfile& profile : config.profiles) {
    const int hue = (series * 47) % 360;
    std::ostringstream path;
    for (const PlompPoint& p : points) {
      if (p.masker != masker || !(p.compensation == comp) || !(p.profile == profile) ||
          p.srt_dbspl.n == 0) {
        continue;
      }
      path << px(p.level_dbspl) << ',' << py(p.srt_dbspl.mean) << ' ';
    }
    svg << "<polyline fill=\"none\" stroke=\"hsl(" << hue << ",70%,40%)\" points=\"" << path.str()
        << "\"/>\n";
    svg << "<text x=\"" << kW - kRight + 10 << "\" y=\"" << kTop + 12 * (series + 1)
        << "\" fill=\"hsl(" << hue << ",70%,40%)\">" << profile.Name() << "</text>\n";
    ++series;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

std::vector<std::string> WriteExperimentOutputs(const ExperimentConfig& config,
                                                const ExperimentResults& results,
                                                const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::vector<std::string> written;
  const auto emit = [&](const std::string& name, const std::string& text) {
    const std::string path = (fs::path(out_dir) / name).string();
    WriteText(path, text);
    written.push_back(path);
  };
  // Deterministic order regardless of the completion order of units.
  std::vector<const ConditionResult*> sorted;
  for (const ConditionResult& r : results.conditions) sorted.push_back(&r);
  const auto rank = [&](const ConditionResult* r) {
    const auto pos = [](const auto& list, const auto& v) {
      return std::find(list.begin(), list.end(), v) - list.begin();
    };
    return std::make_tuple(pos(config.maskers, r->key.masker),
                           pos(config.profiles, r->key.profile),
                           pos(config.compensations, r->key.compensation),
                           pos(config.levels, r->key.level_dbspl),
                           pos(config.seeds, r->key.seed));
  };
  std::sort(sorted.begin(), sorted.end(),
            [&](const auto* a, const auto* b) { return rank(a) < rank(b); });

  std::ostringstream csv;
  csv << "masker,level_dbspl,profile,compensation,seed,target,srt_snr_db,srt_dbspl,reachable\n";
  for (const ConditionResult* r : sorted) {
    for (size_t t = 0; t < config.targets.size(); ++t) {
      const auto& srt = r->srt_snr_db[t];
      csv << MaskerName(r->key.masker) << ',' << FormatNumber(r->key.level_dbspl) << ','
          << r->key.profile.Name() << ',' << r->key.compensation.Name() << ',' << r->key.seed
          << ',' << FormatNumber(config.targets[t]) << ',' << Optional(srt) << ','
          << (srt ? FormatNumber(r->key.level_dbspl + *srt) : "") << ','
          << (srt ? "yes" : "no") << '\n';
    }
  }
  emit("results.csv", csv.str());

  std::ostringstream env;
  env << "masker,level_dbspl,profile,compensation,seed";
  for (double snr : config.Snrs()) env << ",acc_" << FormatNumber(snr);
  env << '\n';
  for (const ConditionResult* r : sorted) {
    env << MaskerName(r->key.masker) << ',' << FormatNumber(r->key.level_dbspl) << ','
        << r->key.profile.Name() << ',' << r->key.compensation.Name() << ',' << r->key.seed;
    for (double a : r->map.Envelope()) env << ',' << FormatNumber(a);
    env << '\n';
  }
  emit("envelopes.csv", env.str());

  const std::vector<PlompPoint> plomp = PlompCurves(config, results, 0.5);
  std::ostringstream pc;
  pc << "masker,profile,compensation,level_dbspl,n,srt_dbspl_mean,srt_dbspl_sd,"
        "srt_snr_mean,unreachable\n";
  for (const PlompPoint& p : plomp) {
    pc << MaskerName(p.masker) << ',' << p.profile.Name() << ',' << p.compensation.Name() << ','
       << FormatNumber(p.level_dbspl) << ',' << p.srt_dbspl.n << ','
       << (p.srt_dbspl.n ? FormatNumber(p.srt_dbspl.mean) : "") << ','
       << (p.srt_dbspl.n > 1 ? FormatNumber(p.srt_dbspl.sd) : "") << ','
       << (p.srt_dbspl.n ? FormatNumber(p.srt_dbspl.mean - p.level_dbspl) : "") << ','
       << p.unreachable << '\n';
  }
  emit("plomp.csv", pc.str());

  std::ostringstream ps;
  ps << "masker,profile,compensation,level_dbspl,target,n,srt_snr_mean,srt_snr_sd,unreachable\n";
  for (double target : config.targets) {
    for (const PlompPoint& p : PlompCurves(config, results, target)) {
      ps << MaskerName(p.masker) << ',' << p.profile.Name() << ',' << p.compensation.Name()
         << ',' << FormatNumber(p.level_dbspl) << ',' << FormatNumber(target) << ','
         << p.srt_dbspl.n << ','
         << (p.srt_dbspl.n ? FormatNumber(p.srt_dbspl.mean - p.level_dbspl) : "") << ','
         << (p.srt_dbspl.n > 1 ? FormatNumber(p.srt_dbspl.sd) : "") << ',' << p.unreachable
         << '\n';
    }
  }
  emit("psychometric.csv", ps.str());

  const std::vector<BenefitRow> benefit = BenefitTable(config, results);
  std::ostringstream bc;
  bc << "masker,profile,compensation,n,benefit_mean_db,benefit_sd_db,ci95_low,ci95_high,"
        "missing\n";
  for (const BenefitRow& b : benefit) {
    bc << MaskerName(b.masker) << ',' << b.profile.Name() << ',' << b.compensation.Name() << ','
       << b.benefit_db.n << ',' << (b.benefit_db.n ? FormatNumber(b.benefit_db.mean) : "")
       << ',' << (b.benefit_db.n > 1 ? FormatNumber(b.benefit_db.sd) : "") << ','
       << (b.benefit_db.n > 1 ? FormatNumber(b.benefit_db.ci_low) : "") << ','
       << (b.benefit_db.n > 1 ? FormatNumber(b.benefit_db.ci_high) : "") << ',' << b.missing
       << '\n';
  }
  emit("benefit.csv", bc.str());

  Json j;
  j["snrs"] = config.Snrs();
  j["targets"] = config.targets;
  j["benefit_levels"] = config.benefit_levels;
  Json conditions = Json::array();
  for (const ConditionResult* r : sorted) conditions.push_back(ConditionToJson(*r));
  j["conditions"] = conditions;
  Json bj = Json::array();
  for (const BenefitRow& b : benefit) {
    Json row;
    row["masker"] = MaskerName(b.masker);
    row["profile"] = b.profile.Name();
    row["compensation"] = b.compensation.Name();
    row["n"] = b.benefit_db.n;
    row["mean_db"] = b.benefit_db.mean;
    row["sd_db"] = b.benefit_db.sd;
    row["ci95"] = {b.benefit_db.ci_low, b.benefit_db.ci_high};
    row["missing"] = b.missing;
    bj.push_back(row);
  }
  j["benefit"] = bj;
  emit("results.json", j.dump(1) + "\n");

  for (MaskerKind m : config.maskers) {
    for (const Compensation& c : config.compensations) {
      emit("plomp_" + MaskerName(m) + "_" + c.Name() + ".svg", PlompSvg(config, plomp, m, c));
    }
  }
  return written;
}

}  // namespace platt
