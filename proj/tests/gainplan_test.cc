#include "platt/gainplan.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "platt/fixtures.h"
#include "test_util.h"

namespace platt {
namespace {

const FilterbankSpec& Spec() {
  static const FilterbankSpec spec = DesignFilterbank();
  return spec;
}

int ChannelAt(double hz) {
  for (int c = 0; c < kNumChannels; ++c) {
    if (Spec().channel(c).center_hz == hz) return c;
  }
  ADD_FAILURE() << "no channel at " << hz;
  return 0;
}

PlattConfig WideOpen(double k) {
  PlattConfig config = PlattConfig::Default(Spec());
  config.expansion = k;
  config.input_dr = DynamicRange::Uniform(-200.0, 300.0);
  config.output_dr = config.input_dr;
  return config;
}

// Direct truncated-and-renormalized Hanning convolution.
ChannelVector SmoothOracle(const ChannelVector& x, int width) {
  ChannelVector out;
  for (int j = 0; j < kNumChannels; ++j) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < kNumChannels; ++i) {
      const int k = i - j;
      if (std::abs(2 * k) >= width) continue;
      const double w = 0.5 + 0.5 * std::cos(2 * std::numbers::pi * k / width);
      num += w * x[i];
      den += w;
    }
    out[j] = num / den;
  }
  return out;
}

TEST(Smoothing, ConstantsArePreserved) {
  for (int width : {8, 16, 32, 64}) {
    const ChannelVector s = Smooth(Filled(42.5), width);
    for (double v : s) EXPECT_NEAR(v, 42.5, 1e-12);
  }
}

TEST(Smoothing, MatchesDirectConvolution) {
  std::mt19937_64 rng(21);
  for (int width : {2, 5, 8, 16, 32, 64, 100, 128}) {
    const ChannelVector x = testing::RandomLevels(rng, 0.0, 100.0);
    const ChannelVector oracle = SmoothOracle(x, width);
    const ChannelVector s = Smooth(x, width);
    BandedSmoother banded(width);
    BandedSmoother::Padded padded{};
    std::copy(x.begin(), x.end(), padded.begin() + BandedSmoother::kPad);
    ChannelVector b;
    banded.Apply(padded, b);
    for (int c = 0; c < kNumChannels; ++c) {
      EXPECT_NEAR(s[c], oracle[c], 1e-10) << width;
      EXPECT_NEAR(b[c], oracle[c], 1e-10) << width;
    }
  }
}

TEST(Smoothing, ImpulseGivesCenteredHanningWithHalfWidthFwhm) {
  // Widths whose rows around channel 39 are not truncated by the edges.
  for (int width : {8, 16, 32, 48}) {
    ChannelVector impulse = Filled(0.0);
    impulse[39] = 1.0;
    const ChannelVector s = Smooth(impulse, width);
    const double peak = s[39];
    EXPECT_EQ(*std::max_element(s.begin(), s.end()), peak);
    // The Hanning value at offset width / 4 is half the peak: FWHM is width / 2
    // channels, i.e. width / 4 ERB at half-ERB spacing.
    EXPECT_NEAR(s[39 + width / 4] / peak, 0.5, 1e-12);
    EXPECT_NEAR(s[39 - width / 4] / peak, 0.5, 1e-12);
  }
}

TEST(Decompose, ReconstructsExactlyOnRandomFrames) {
  std::mt19937_64 rng(22);
  const GainPlanner planner(PlattConfig::Default(Spec()));
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const ChannelVector x = testing::RandomLevels(rng, -10.0, 120.0);
    const ChannelVector r = planner.Decompose(x).Reconstruct();
    for (int c = 0; c < kNumChannels; ++c) worst = std::max(worst, std::abs(r[c] - x[c]));
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(Decompose, ConstantSpectrumHasNoDifferences) {
  const LayerDecomposition d = Decompose(Filled(63.0), PlattConfig::Default(Spec()));
  for (int c = 0; c < kNumChannels; ++c) {
    EXPECT_NEAR(d.base[c], 63.0, 1e-12);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(d.diff[i][c], 0.0, 1e-12);
  }
}

TEST(Decompose, TwoToneFixtureLayerDynamics) {
  const Calibration cal;
  const ChannelVector levels = FinalEnvelope(TwoToneFixture(48000.0, cal), 48000.0, cal);
  EXPECT_NEAR(levels[ChannelAt(496)], 85.0, 1.0);
  EXPECT_NEAR(levels[ChannelAt(2023)], 85.0, 1.0);
  const LayerDecomposition d = Decompose(levels, PlattConfig::Default(Spec()));
  double d1 = 0.0, d2 = 0.0;
  for (int c = 0; c < kNumChannels; ++c) {
    d1 = std::max(d1, std::abs(d.diff[0][c]));
    d2 = std::max(d2, std::abs(d.diff[1][c]));
  }
  EXPECT_NEAR(d1, 6.0, 2.0);
  EXPECT_LT(d2, 9.0);
}

TEST(MapBase, IdentityAndLinear) {
  const ChannelVector base = Filled(65.0);
  const DynamicRange in = DynamicRange::Uniform(25.0, 105.0);
  const DynamicRange out = DynamicRange::Uniform(50.0, 90.0);
  EXPECT_EQ(MapBase(base, in, out, BaseMap::kIdentity), base);
  EXPECT_DOUBLE_EQ(MapBase(Filled(105.0), in, out, BaseMap::kLinear)[0], 90.0);
  EXPECT_DOUBLE_EQ(MapBase(Filled(25.0), in, out, BaseMap::kLinear)[0], 50.0);
  EXPECT_DOUBLE_EQ(MapBase(base, in, out, BaseMap::kLinear)[0], 70.0);
  EXPECT_DOUBLE_EQ(MapBase(Filled(0.0), in, out, BaseMap::kLinear)[0], 50.0);  // clamped
}

TEST(DefaultInputRange, PiecewiseLimits) {
  const DynamicRange r = DynamicRange::DefaultInput(Spec());
  for (int c = 0; c < kNumChannels; ++c) {
    const double f = Spec().channel(c).center_hz;
    EXPECT_EQ(r.upper[c], 105.0);
    if (f >= 500.0 && f <= 4000.0) EXPECT_EQ(r.lower[c], 25.0);
    if (f < 250.0 || f > 8000.0) EXPECT_EQ(r.lower[c], 30.0);
    EXPECT_GE(r.lower[c], 25.0);
    EXPECT_LE(r.lower[c], 30.0);
  }
}

TEST(ConditionalFactors, OneThirdOfTheDifferenceFits) {
  ChannelVector current = Filled(60.0), diff = Filled(0.0);
  current[40] = 80.0;
  diff[40] = 30.0;
  const ChannelVector f = LocalFactors(current, diff, DynamicRange::Uniform(20.0, 90.0));
  EXPECT_DOUBLE_EQ(f[40], 1.0 / 3.0);
  EXPECT_EQ(f[39], 1.0);
  // Negative differences are limited by the lower bound.
  current[10] = 30.0;
  diff[10] = -20.0;
  EXPECT_DOUBLE_EQ(LocalFactors(current, diff, DynamicRange::Uniform(20.0, 90.0))[10], 0.5);
  // Already beyond the limit in the direction of the difference.
  current[11] = 95.0;
  diff[11] = 1.0;
  EXPECT_EQ(LocalFactors(current, diff, DynamicRange::Uniform(20.0, 90.0))[11], 0.0);
}

TEST(ConditionalFactors, FittingDifferencesAreUntouched) {
  std::mt19937_64 rng(23);
  const ChannelVector current = testing::RandomLevels(rng, 40.0, 60.0);
  const ChannelVector diff = testing::RandomLevels(rng, -10.0, 10.0);
  const ChannelVector f = ConditionalFactors(current, diff, DynamicRange::Uniform(20.0, 90.0), 6);
  for (double v : f) EXPECT_EQ(v, 1.0);
}

TEST(ConditionalFactors, PropagationAround2708Hz) {
  ChannelVector local = Filled(1.0);
  const int c0 = ChannelAt(2708);
  local[c0] = 0.0;
  const ChannelVector f = PropagateFactors(local, 6);
  EXPECT_EQ(f[c0], 0.0);
  EXPECT_LE(f[ChannelAt(2346)], 0.5 + 1e-12);
  EXPECT_LE(f[ChannelAt(3112)], 0.5 + 1e-12);
  EXPECT_NEAR(f[ChannelAt(2346)], 0.5, 1e-12);
  for (int c = 0; c < kNumChannels; ++c) {
    const double hz = Spec().channel(c).center_hz;
    if (hz <= 2023.0 || hz >= 3565.0) EXPECT_EQ(f[c], 1.0) << hz;
    if (hz > 2023.0 && hz < 3565.0) EXPECT_LT(f[c], 1.0) << hz;
  }
}

TEST(ConditionalFactors, PropagationMatchesMinPlusDefinition) {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int fwhm : {1, 3, 6, 12, 20}) {
    ChannelVector local;
    for (double& v : local) v = u(rng) < 0.7 ? 1.0 : u(rng);
    const ChannelVector f = PropagateFactors(local, fwhm);
    for (int j = 0; j < kNumChannels; ++j) {
      double expected = local[j];
      for (int i = 0; i < kNumChannels; ++i) {
        const int d = std::abs(j - i);
        const double w = d < fwhm ? 0.5 + 0.5 * std::cos(std::numbers::pi * d / fwhm) : 0.0;
        expected = std::min(expected, local[i] + 1.0 - w);
      }
      EXPECT_NEAR(f[j], std::clamp(expected, 0.0, 1.0), 1e-12);
      EXPECT_LE(f[j], local[j]);
    }
    // The penalty 1 - w is not subadditive, so a second pass may lower
    // factors further but never raises them.
    const ChannelVector twice = PropagateFactors(f, fwhm);
    for (int j = 0; j < kNumChannels; ++j) EXPECT_LE(twice[j], f[j] + 1e-12);
  }
}

TEST(PlanGains, NeutralWithMatchedRangesAndUnitExpansion) {
  std::mt19937_64 rng(25);
  const GainPlanner planner(PlattConfig::Default(Spec()));
  for (int i = 0; i < 1000; ++i) {
    const ChannelVector levels = testing::RandomLevels(rng, 40.0, 90.0);
    const ChannelVector g = planner.Plan(levels);
    for (double v : g) ASSERT_LT(std::abs(v), 1e-9);
  }
}

TEST(PlanGains, TwoToneFixtureIsCompressedIntoOutputRange) {
  const Calibration cal;
  const ChannelVector levels = FinalEnvelope(TwoToneFixture(48000.0, cal), 48000.0, cal);
  PlattConfig config = PlattConfig::Default(Spec());
  config.output_dr = DynamicRange::Uniform(50.0, 90.0);
  config.base_map = BaseMap::kLinear;
  const ChannelVector g = PlanGains(levels, config);
  for (double hz : {496.0, 2023.0}) {
    const int c = ChannelAt(hz);
    EXPECT_GE(levels[c] + g[c], 50.0);
    EXPECT_LE(levels[c] + g[c], 90.0);
  }
  EXPECT_GT(*std::max_element(g.begin(), g.end()) - *std::min_element(g.begin(), g.end()), 10.0);
}

double Projection(const ChannelVector& x, double cycles_per_channel) {
  // Least-squares amplitude of a sinusoid over the central channels.
  double s = 0.0, c = 0.0, ss = 0.0, cc = 0.0;
  for (int j = 15; j < 63; ++j) {
    const double ph = 2 * std::numbers::pi * cycles_per_channel * j;
    s += x[j] * std::sin(ph);
    c += x[j] * std::cos(ph);
    ss += std::sin(ph) * std::sin(ph);
    cc += std::cos(ph) * std::cos(ph);
  }
  return std::hypot(s / ss, c / cc);
}

TEST(PlanGains, ExpansionScalesSpectralModulation) {
  // 1/5 cycles per ERB at half-ERB spacing is 1/10 cycles per channel.
  constexpr double kCycles = 0.1;
  ChannelVector levels;
  for (int c = 0; c < kNumChannels; ++c) levels[c] = 60.0 + 3.0 * std::sin(2 * std::numbers::pi * kCycles * c);
  for (double k : {2.0, 4.0, 6.0, 8.0}) {
    const GainPlanner planner(WideOpen(k));
    const ChannelVector g = planner.Plan(levels);
    const ChannelVector d2 = planner.Decompose(levels).diff[1];
    ChannelVector planned;
    for (int c = 0; c < kNumChannels; ++c) planned[c] = d2[c] + g[c];
    EXPECT_NEAR(Projection(planned, kCycles) / Projection(d2, kCycles), k, 0.1 * k);
  }
}

TEST(PlanGains, ConditionalLayersNeverCrossUpperLimit) {
  std::mt19937_64 rng(26);
  PlattConfig config = PlattConfig::Default(Spec());
  config.expansion = 8.0;
  config.output_dr = DynamicRange::Uniform(40.0, 80.0);
  config.base_map = BaseMap::kLinear;
  const GainPlanner planner(config);
  for (int i = 0; i < 2000; ++i) {
    const PlanTrace t = planner.Trace(testing::RandomLevels(rng, 0.0, 110.0));
    for (int c = 0; c < kNumChannels; ++c) {
      const double before = t.output_before_diff3[c];
      const double upper = config.output_dr.upper[c];
      const double lower = config.output_dr.lower[c];
      // Diffs 3 and 4 move the output toward or within the limits only.
      if (before <= upper) EXPECT_LE(t.output[c], upper + 1e-9);
      if (before >= lower) EXPECT_GE(t.output[c], lower - 1e-9);
      EXPECT_NEAR(t.gains[c], t.output[c] - t.levels[c], 1e-12);
    }
  }
}

TEST(PlanGains, LowSpectralDynamicIsNotCompressed) {
  std::mt19937_64 rng(27);
  PlattConfig config = PlattConfig::Default(Spec());
  config.input_dr = DynamicRange::Uniform(25.0, 105.0);
  config.output_dr = DynamicRange::Uniform(50.0, 90.0);
  config.base_map = BaseMap::kLinear;
  std::normal_distribution<double> n(0.0, 1.0);
  ChannelVector levels;
  for (double& v : levels) v = 65.0 + n(rng);
  const ChannelVector g = PlanGains(levels, config);
  EXPECT_LT(*std::max_element(g.begin(), g.end()) - *std::min_element(g.begin(), g.end()), 3.0);
}

TEST(PlattConfig, ValidationRejectsBadSettings) {
  PlattConfig config = PlattConfig::Default(Spec());
  config.expansion = 0.5;
  EXPECT_THROW(config.Validate(), ConfigError);
  config.expansion = 2.0;
  config.output_dr.lower[5] = config.output_dr.upper[5];
  EXPECT_THROW(config.Validate(), ConfigError);
  EXPECT_THROW(BandedSmoother(1), ConfigError);
  EXPECT_THROW(FactorPropagator(0), ConfigError);
}

}  // namespace
}  // namespace platt
