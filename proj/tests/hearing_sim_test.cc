#include "platt/hearing_sim.h"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <sstream>

#include "platt/thresholds.h"
#include "test_util.h"

namespace platt {
namespace {

std::vector<double> Sine(double hz, double amplitude, int samples) {
  std::vector<double> x(samples);
  for (int n = 0; n < samples; ++n) x[n] = amplitude * std::sin(2 * std::numbers::pi * hz * n / 48000.0);
  return x;
}

TEST(LogMel, FrameCountAndGeometry) {
  const LogMelExtractor mel(48000.0, Calibration{});
  EXPECT_EQ(mel.window_length(), 1200);
  EXPECT_EQ(mel.shift(), 480);
  EXPECT_EQ(mel.fft_size(), 2048);
  EXPECT_EQ(mel.NumFrames(1199), 0);
  EXPECT_EQ(mel.NumFrames(1200), 1);
  EXPECT_EQ(mel.NumFrames(48000), 98);
  ASSERT_EQ(mel.center_hz().size(), 36u);
  for (size_t b = 1; b < 36; ++b) EXPECT_GT(mel.center_hz()[b], mel.center_hz()[b - 1]);
  EXPECT_THROW(mel.Compute(std::vector<double>(100, 0.0)), NumericalError);
}

TEST(LogMel, CenteredToneReadsItsLevel) {
  const Calibration cal;
  const LogMelExtractor mel(48000.0, cal);
  for (int b : {12, 20, 30}) {
    const double fc = mel.center_hz()[b];
    const FeatureMatrix f = mel.Compute(Sine(fc, 0.01, 24000));
    for (int t = 0; t < f.frames; ++t) {
      EXPECT_NEAR(f.at(t, b), 20.0 * std::log10(0.01) + 110.0, 0.5) << fc;
      // The tone's own band is the loudest.
      for (int o = 0; o < 36; ++o) EXPECT_LE(f.at(t, o), f.at(t, b) + 1e-9);
    }
  }
}

TEST(LogMel, TenfoldAmplitudeIsTwentyDecibels) {
  const LogMelExtractor mel(48000.0, Calibration{});
  const std::vector<double> x = testing::WhiteNoise(9600, 0.01, 41);
  std::vector<double> y = x;
  for (double& v : y) v *= 10.0;
  const FeatureMatrix a = mel.Compute(x), b = mel.Compute(y);
  for (size_t i = 0; i < a.data.size(); ++i) EXPECT_NEAR(b.data[i] - a.data[i], 20.0, 1e-9);
}

TEST(LogMel, WhiteNoisePowerMatchesWeightSum) {
  // E|X_k|^2 = v * sum(w^2), so each one-sided bin carries 2 v / N on average.
  const LogMelExtractor mel(48000.0, Calibration{});
  const double v = 1e-4;
  const FeatureMatrix f = mel.Compute(testing::WhiteNoise(48000 * 20, std::sqrt(v), 42));
  for (int b = 5; b < 36; ++b) {
    double weight_sum = 0.0;
    for (double w : mel.weights()[b]) weight_sum += w;
    const double expected = 2.0 * (2.0 * v / mel.fft_size()) * weight_sum;
    double mean = 0.0;
    for (int t = 0; t < f.frames; ++t) mean += std::pow(10.0, (f.at(t, b) - 110.0) / 10.0);
    mean /= f.frames;
    EXPECT_NEAR(mean / expected, 1.0, 0.05) << b;
  }
}

FeatureMatrix Constant(int frames, double value) {
  const LogMelExtractor mel(48000.0, Calibration{});
  FeatureMatrix f(frames, 36, 10.0, mel.center_hz());
  std::fill(f.data.begin(), f.data.end(), value);
  return f;
}

TEST(HearingProfile, NameRoundTrip) {
  for (const HearingProfile& p : HearingProfile::StandardGrid()) {
    EXPECT_EQ(HearingProfile::Parse(p.Name()), p);
  }
  EXPECT_EQ(HearingProfile::StandardGrid().size(), 16u);
  EXPECT_EQ(HearingProfile::Parse("P-none-0").Name(), "P-none-0");
  EXPECT_EQ(HearingProfile::Parse("P-2000-7").limit_hz, 2000.0);
  EXPECT_EQ(HearingProfile::Parse("P-2000-7").uncertainty_db, 7.0);
  for (const char* bad : {"", "P-none", "Q-none-1", "P-x-1", "P-1000--1", "P-none-1-2"}) {
    EXPECT_THROW(HearingProfile::Parse(bad), ConfigError) << bad;
  }
}

TEST(HearingProfile, NormalHearingIsIdentity) {
  const FeatureMatrix f = Constant(50, 60.0);
  const std::vector<double> floor = ThresholdFloor(f.center_hz);
  const FeatureMatrix g = ApplyProfile(f, HearingProfile::Parse("P-none-0"), floor, 1);
  EXPECT_EQ(g.data, f.data);
}

TEST(HearingProfile, UncertaintyHasTheConfiguredVariance) {
  const FeatureMatrix f = Constant(3000, 60.0);  // 108000 cells
  const std::vector<double> floor(36, 0.0);
  const FeatureMatrix g = ApplyProfile(f, HearingProfile::Parse("P-none-7"), floor, 2);
  double sum = 0.0, sum_sq = 0.0;
  for (double v : g.data) {
    sum += v - 60.0;
    sum_sq += (v - 60.0) * (v - 60.0);
  }
  const double n = static_cast<double>(g.data.size());
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.0, 0.1);
  EXPECT_NEAR(sum_sq / n - mean * mean, 49.0, 1.5);
  EXPECT_EQ(ApplyProfile(f, HearingProfile::Parse("P-none-7"), floor, 2).data, g.data);
  EXPECT_NE(ApplyProfile(f, HearingProfile::Parse("P-none-7"), floor, 3).data, g.data);
}

TEST(HearingProfile, LimitReplacesHighChannelsByFloor) {
  const FeatureMatrix f = Constant(40, 70.0);
  const std::vector<double> floor = ThresholdFloor(f.center_hz);
  const FeatureMatrix g = ApplyProfile(f, HearingProfile::Parse("P-2000-14"), floor, 4);
  int limited = 0;
  for (int c = 0; c < 36; ++c) {
    if (f.center_hz[c] <= 2000.0) continue;
    ++limited;
    for (int t = 0; t < 40; ++t) EXPECT_EQ(g.at(t, c), floor[c]);
  }
  EXPECT_GT(limited, 10);
}

TEST(ThresholdFloor, MaxWithThreshold) {
  FeatureMatrix f = Constant(20, 0.0);
  const std::vector<double> floor = ThresholdFloor(f.center_hz);
  for (size_t c = 0; c < 36; ++c) {
    EXPECT_DOUBLE_EQ(floor[c], ThresholdTable::Iso226().At(f.center_hz[c]));
  }
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-20.0, 90.0);
  for (double& v : f.data) v = u(rng);
  f.data[7] = -std::numeric_limits<double>::infinity();
  const FeatureMatrix g = ApplyThresholdFloor(f, floor);
  for (int t = 0; t < 20; ++t) {
    for (int c = 0; c < 36; ++c) EXPECT_EQ(g.at(t, c), std::max(f.at(t, c), floor[c]));
  }
  EXPECT_EQ(ApplyThresholdFloor(g, floor).data, g.data);  // idempotent
  const std::vector<double> none(36, -std::numeric_limits<double>::infinity());
  EXPECT_EQ(ApplyThresholdFloor(f, none).data, f.data);
}

TEST(ThresholdFloor, CommutesWithLevelShiftAboveThreshold) {
  FeatureMatrix f = Constant(10, 0.0);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(80.0, 100.0);
  for (double& v : f.data) v = u(rng);
  const std::vector<double> floor = ThresholdFloor(f.center_hz);
  FeatureMatrix shifted = f;
  for (double& v : shifted.data) v += 5.0;
  const FeatureMatrix a = ApplyThresholdFloor(shifted, floor);
  FeatureMatrix b = ApplyThresholdFloor(f, floor);
  for (double& v : b.data) v += 5.0;
  EXPECT_EQ(a.data, b.data);
}

TEST(FeatureIo, BinaryAndCsvRoundTrip) {
  FeatureMatrix f = Constant(7, 0.0);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(50.0, 20.0);
  for (double& v : f.data) v = n(rng);
  const std::string path =
      (std::filesystem::temp_directory_path() / "platt_features_test.bin").string();
  WriteFeatureBinary(path, f);
  const FeatureMatrix g = ReadFeatureBinary(path);
  EXPECT_EQ(g.frames, 7);
  EXPECT_EQ(g.channels, 36);
  EXPECT_EQ(g.center_hz, f.center_hz);
  EXPECT_EQ(g.data, f.data);
  std::filesystem::remove(path);
  EXPECT_THROW(ReadFeatureBinary(path), IoError);
  std::ostringstream csv;
  WriteFeatureCsv(csv, f);
  std::istringstream lines(csv.str());
  std::string line;
  int rows = 0;
  std::getline(lines, line);
  EXPECT_EQ(line.rfind("time_ms,", 0), 0u);
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 7);
}

TEST(FeatureMatrix, SliceCopiesFrames) {
  FeatureMatrix f = Constant(10, 0.0);
  for (size_t i = 0; i < f.data.size(); ++i) f.data[i] = static_cast<double>(i);
  const FeatureMatrix s = f.Slice(3, 4);
  EXPECT_EQ(s.frames, 4);
  EXPECT_EQ(s.at(0, 0), f.at(3, 0));
  EXPECT_EQ(s.at(3, 35), f.at(6, 35));
  EXPECT_THROW(f.Slice(8, 3), NumericalError);
}

}  // namespace
}  // namespace platt
