#include "platt/experiment.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

namespace platt {
namespace {

namespace fs = std::filesystem;

constexpr char kTiny[] =
    "experiment.maskers = stationary\n"
    "experiment.levels = 70\n"
    "experiment.profiles = P-none-0, P-none-14\n"
    "experiment.compensations = none, PLATT-4\n"
    "experiment.seeds = 1\n"
    "experiment.snr_min = -30\n"
    "experiment.snr_max = 10\n"
    "experiment.snr_step = 5\n"
    "experiment.targets = 0.5\n"
    "experiment.benefit_levels = 70\n"
    "corpus.masker_length = 1048576\n";

ExperimentConfig Tiny(const std::string& extra = "") {
  return ExperimentConfigFromKeyValues(KeyValueConfig::ParseString(std::string(kTiny) + extra));
}

std::string TempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir.string();
}

TEST(Compensation, NameAndParse) {
  EXPECT_EQ(Compensation::Parse("none"), Compensation{0.0});
  EXPECT_EQ(Compensation::Parse("PLATT-4").expansion, 4.0);
  EXPECT_EQ(Compensation::Parse("PLATT-2.5").Name(), "PLATT-2.5");
  EXPECT_EQ(Compensation{8.0}.Name(), "PLATT-8");
  EXPECT_FALSE(Compensation{}.aided());
  for (const char* bad : {"", "PLATT-", "PLATT-0", "PLATT-17", "platt-4", "PLATT-x"}) {
    EXPECT_THROW(Compensation::Parse(bad), ConfigError) << bad;
  }
}

TEST(ExperimentConfig, DefaultsDescribeTheFullGrid) {
  const ExperimentConfig config = ExperimentConfigFromKeyValues(KeyValueConfig{});
  EXPECT_EQ(config.maskers.size(), 2u);
  EXPECT_EQ(config.levels.size(), 11u);
  EXPECT_EQ(config.profiles.size(), 17u);  // normal hearing plus the 16-profile grid
  EXPECT_EQ(config.compensations.size(), 5u);
  EXPECT_EQ(config.seeds.size(), 5u);
  EXPECT_EQ(config.Snrs().size(), 15u);
  EXPECT_EQ(config.Snrs().front(), -30.0);
  EXPECT_EQ(config.slot_frames(), 52);
  EXPECT_EQ(config.token_frames(), 50);
  EXPECT_EQ(WorkUnits(config).size(), 2u * 11u * 5u);
  EXPECT_NO_THROW(config.Validate());
}

TEST(ExperimentConfig, RejectsInconsistentSettings) {
  const char* bad[] = {
      "experiment.levels = 75\n",
      "experiment.benefit_levels = 80\n",
      "experiment.snr_min = -20\n",
      "experiment.snr_max = 5\n",
      "experiment.targets = 0.05\n",
      "experiment.targets = 1\n",
      "experiment.maskers = pink\n",
      "experiment.profiles = P-none\n",
      "experiment.compensations = PLATT-0\n",
      "corpus.tokens = 20\n",
      "corpus.words = 4\n",
      "experiment.seeds = \n",
      "experiment.bogus = 1\n",
      "sample_rate = 44100\n",
  };
  for (const char* extra : bad) {
    EXPECT_THROW(
        {
          const ExperimentConfig config = Tiny(extra);
          config.Validate();
        },
        ConfigError)
        << extra;
  }
}

TEST(ExperimentConfig, FingerprintTracksResultAffectingSettings) {
  const uint64_t base = Tiny().Fingerprint();
  EXPECT_EQ(Tiny().Fingerprint(), base);
  EXPECT_NE(Tiny("recognizer.shrinkage = 0.5\n").Fingerprint(), base);
  EXPECT_NE(Tiny("corpus.seed = 2\n").Fingerprint(), base);
  EXPECT_NE(Tiny("platt.output.upper = 100\n").Fingerprint(), base);
}

TEST(Seeds, StableUnderOtherAxesAndDistinct) {
  const UnitKey a{MaskerKind::kStationary, 70.0, 1};
  const UnitKey b{MaskerKind::kStationary, 80.0, 1};
  const UnitKey c{MaskerKind::kFluctuating, 70.0, 1};
  // Tokens depend on masker, seed and SNR, not on the presentation level.
  EXPECT_EQ(TokenSeed(a, -3.0), TokenSeed(b, -3.0));
  EXPECT_NE(TokenSeed(a, -3.0), TokenSeed(c, -3.0));
  EXPECT_NE(TokenSeed(a, -3.0), TokenSeed(a, 0.0));
  const HearingProfile p = HearingProfile::Parse("P-none-7");
  const HearingProfile q = HearingProfile::Parse("P-none-14");
  EXPECT_NE(ProfileSeed(a, 0.0, p), ProfileSeed(a, 0.0, q));
  EXPECT_NE(ProfileSeed(a, 0.0, p), ProfileSeed(b, 0.0, p));
}

class TinyRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new std::string(TempDir("platt_experiment_test"));
    RunOptions options;
    options.out_dir = *dir_;
    first_ = new ExperimentResults(RunExperiment(Tiny(), options));
  }
  static void TearDownTestSuite() {
    fs::remove_all(*dir_);
    delete first_;
    delete dir_;
  }
  static std::string* dir_;
  static ExperimentResults* first_;
};
std::string* TinyRun::dir_ = nullptr;
ExperimentResults* TinyRun::first_ = nullptr;

void ExpectSameResults(const ExperimentResults& a, const ExperimentResults& b) {
  ASSERT_EQ(a.conditions.size(), b.conditions.size());
  for (size_t i = 0; i < a.conditions.size(); ++i) {
    EXPECT_EQ(a.conditions[i].key.profile, b.conditions[i].key.profile);
    EXPECT_EQ(a.conditions[i].key.compensation, b.conditions[i].key.compensation);
    EXPECT_EQ(a.conditions[i].map.accuracy, b.conditions[i].map.accuracy);
    EXPECT_EQ(a.conditions[i].srt_snr_db, b.conditions[i].srt_snr_db);
  }
}

TEST_F(TinyRun, ProducesOneConditionPerProfileAndCompensation) {
  EXPECT_EQ(first_->units_computed, 1);
  EXPECT_EQ(first_->units_loaded, 0);
  ASSERT_EQ(first_->conditions.size(), 4u);
  for (const ConditionResult& r : first_->conditions) {
    EXPECT_EQ(r.map.snrs.size(), 9u);
    ASSERT_EQ(r.srt_snr_db.size(), 1u);
    EXPECT_TRUE(r.srt_snr_db[0].has_value()) << r.key.profile.Name() << " " << r.key.compensation.Name();
  }
  EXPECT_TRUE(fs::exists(fs::path(*dir_) / "units" / "stationary-L70-s1.json"));
}

TEST_F(TinyRun, ResumeLoadsIdenticalResults) {
  RunOptions options;
  options.out_dir = *dir_;
  const ExperimentResults again = RunExperiment(Tiny(), options);
  EXPECT_EQ(again.units_loaded, 1);
  EXPECT_EQ(again.units_computed, 0);
  ExpectSameResults(*first_, again);
}

TEST_F(TinyRun, RecomputationIsDeterministic) {
  RunOptions options;
  options.out_dir = *dir_;
  options.resume = false;
  const ExperimentResults again = RunExperiment(Tiny(), options);
  EXPECT_EQ(again.units_computed, 1);
  ExpectSameResults(*first_, again);
}

TEST_F(TinyRun, CorruptOrStaleCacheIsRecomputed) {
  const std::string copy = TempDir("platt_experiment_test_stale");
  fs::create_directories(fs::path(copy) / "units");
  const fs::path unit = fs::path(copy) / "units" / "stationary-L70-s1.json";
  fs::copy_file(fs::path(*dir_) / "units" / "stationary-L70-s1.json", unit);
  RunOptions options;
  options.out_dir = copy;
  // Different recognizer settings: the cached unit no longer applies.
  const ExperimentResults stale = RunExperiment(Tiny("recognizer.variance_floor = 2\n"), options);
  EXPECT_EQ(stale.units_computed, 1);
  std::ofstream(unit) << "{\"fingerprint\": ";
  const ExperimentResults corrupt = RunExperiment(Tiny(), options);
  EXPECT_EQ(corrupt.units_computed, 1);
  ExpectSameResults(*first_, corrupt);
  fs::remove_all(copy);
}

TEST_F(TinyRun, SummariesAndOutputs) {
  const ExperimentConfig config = Tiny();
  const std::vector<PlompPoint> plomp = PlompCurves(config, *first_, 0.5);
  ASSERT_EQ(plomp.size(), 4u);
  for (const PlompPoint& p : plomp) {
    const auto& r = *std::find_if(first_->conditions.begin(), first_->conditions.end(),
                                  [&](const ConditionResult& c) {
                                    return c.key.profile == p.profile &&
                                           c.key.compensation == p.compensation;
                                  });
    EXPECT_DOUBLE_EQ(p.srt_dbspl.mean, 70.0 + *r.srt_snr_db[0]);
  }
  const std::vector<BenefitRow> benefit = BenefitTable(config, *first_);
  ASSERT_EQ(benefit.size(), 2u);  // one aided compensation per profile
  for (const BenefitRow& row : benefit) {
    EXPECT_EQ(row.compensation.Name(), "PLATT-4");
    EXPECT_EQ(row.benefit_db.n, 1);
  }
  EXPECT_THROW(PlompCurves(config, *first_, 0.7), ConfigError);
  const std::string out = TempDir("platt_experiment_test_out");
  const std::vector<std::string> written = WriteExperimentOutputs(config, *first_, out);
  for (const char* name : {"results.csv", "plomp.csv", "benefit.csv", "psychometric.csv",
                           "envelopes.csv", "results.json"}) {
    EXPECT_TRUE(fs::exists(fs::path(out) / name)) << name;
  }
  EXPECT_TRUE(fs::exists(fs::path(out) / "plomp_stationary_PLATT-4.svg"));
  for (const std::string& path : written) EXPECT_TRUE(fs::exists(path)) << path;
  // Deterministic output bytes.
  const std::string again = TempDir("platt_experiment_test_out2");
  WriteExperimentOutputs(config, *first_, again);
  for (const char* name : {"results.csv", "benefit.csv", "results.json"}) {
    std::ifstream a(fs::path(out) / name), b(fs::path(again) / name);
    const std::string sa((std::istreambuf_iterator<char>(a)), {});
    const std::string sb((std::istreambuf_iterator<char>(b)), {});
    EXPECT_EQ(sa, sb) << name;
  }
  fs::remove_all(out);
  fs::remove_all(again);
}

}  // namespace
}  // namespace platt
