#include "platt/kernels.h"

#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "platt/envelope.h"
#include "test_util.h"

namespace platt {
namespace {

class KernelsTest : public ::testing::Test {
 protected:
  FilterbankSpec spec_ = DesignFilterbank();
  Filterbank fb_{spec_};
};

TEST_F(KernelsTest, AnalysisMatchesReference) {
  const std::vector<double> x = testing::WhiteNoise(4000, 0.1, 1);
  FilterState s1, s2;
  BandBlock b1, b2;
  // Two blocks so that state hand-over is covered as well.
  for (int part = 0; part < 2; ++part) {
    std::span<const double> block(x.data() + part * 2000, 2000);
    fb_.Analyze(block, s1, b1);
    reference::Analyze(spec_, block, s2, b2);
    for (int n = 0; n < 2000; ++n) {
      for (int c = 0; c < 78; ++c) {
        ASSERT_NEAR(b1.Re(n, c), b2.Re(n, c), 1e-12) << n << "," << c;
        ASSERT_NEAR(b1.Im(n, c), b2.Im(n, c), 1e-12) << n << "," << c;
      }
    }
  }
}

TEST_F(KernelsTest, SynthesisMatchesReference) {
  const std::vector<double> x = testing::WhiteNoise(960, 0.1, 2);
  FilterState s1, s2;
  BandBlock bands;
  fb_.Analyze(x, s1, bands);
  std::mt19937_64 rng(3);
  std::vector<double> o1(960), o2(960);
  for (int round = 0; round < 5; ++round) {
    ChannelVector target = testing::RandomLevels(rng, -30.0, 30.0);
    if (round == 2) target[10] = kMuteDb;
    fb_.Synthesize(bands, target, s1, o1);
    reference::Synthesize(spec_, bands, target, s2, o2);
    for (int n = 0; n < 960; ++n) ASSERT_NEAR(o1[n], o2[n], 1e-9 * (1.0 + std::abs(o2[n])));
    for (int c = 0; c < 78; ++c) {
      if (s2.applied_gain_db[c] == kMuteDb) {
        ASSERT_EQ(s1.applied_gain_db[c], kMuteDb);
      } else {
        ASSERT_NEAR(s1.applied_gain_db[c], s2.applied_gain_db[c], 1e-9);
      }
    }
  }
}

TEST_F(KernelsTest, BlockSplitDoesNotChangeResults) {
  const std::vector<double> x = testing::WhiteNoise(3000, 0.2, 4);
  FilterState whole_state, split_state;
  BandBlock whole, part;
  fb_.Analyze(x, whole_state, whole);
  int pos = 0;
  std::mt19937 rng(5);
  while (pos < 3000) {
    const int len = std::min(3000 - pos, 1 + static_cast<int>(rng() % 300));
    fb_.Analyze(std::span<const double>(x.data() + pos, len), split_state, part);
    for (int n = 0; n < len; ++n) {
      for (int c = 0; c < 78; ++c) ASSERT_EQ(part.Re(n, c), whole.Re(n + pos, c));
    }
    pos += len;
  }
}

TEST_F(KernelsTest, TrackedAnalysisMatchesSeparateEnvelope) {
  const std::vector<double> x = testing::WhiteNoise(2400, 0.1, 6);
  const Calibration cal;
  EnvelopeTracker fused(spec_, cal), separate(spec_, cal);
  FilterState s1, s2;
  BandBlock b1, b2;
  fb_.AnalyzeTracked(x, s1, fused.rule(), fused.mutable_state(), b1);
  fb_.Analyze(x, s2, b2);
  separate.Process(b2);
  const ChannelVector a = fused.Levels(), b = separate.Levels();
  for (int c = 0; c < 78; ++c) EXPECT_NEAR(a[c], b[c], 1e-9);
  for (int n = 0; n < 2400; n += 7) {
    for (int c = 0; c < 78; ++c) ASSERT_EQ(b1.Re(n, c), b2.Re(n, c));
  }
}

TEST_F(KernelsTest, AppliedGainNeverExceedsSlewLimit) {
  std::mt19937_64 rng(7);
  FilterState state;
  BandBlock bands;
  bands.Resize(48);
  std::fill(bands.re.begin(), bands.re.end(), 0.0);
  std::vector<double> out(48);
  std::uniform_real_distribution<double> u(-60.0, 60.0);
  std::bernoulli_distribution mute(0.02);
  for (int frame = 0; frame < 2000; ++frame) {
    ChannelVector target;
    for (double& t : target) t = mute(rng) ? kMuteDb : u(rng);
    // Step one sample at a time to observe every applied gain.
    for (int n = 0; n < 48; ++n) {
      const auto before = state.applied_gain_db;
      BandBlock one;
      one.Resize(1);
      std::fill(one.re.begin(), one.re.end(), 0.0);
      std::vector<double> o(1);
      fb_.Synthesize(one, target, state, o);
      for (int c = 0; c < 78; ++c) {
        const double g = state.applied_gain_db[c];
        if (g == kMuteDb || before[c] == kMuteDb) continue;  // mute and unmute are immediate
        ASSERT_LE(std::abs(g - before[c]), spec_.channel(c).max_gain_step_db * (1 + 1e-12));
      }
    }
  }
}

TEST(StepGain, ArithmeticOfTheSlewRule) {
  double g = 0.0;
  StepGain(40.0, 24.0 * 1000.0 / 48000.0, g);
  EXPECT_DOUBLE_EQ(g, 0.5);
  for (int i = 0; i < 100; ++i) StepGain(40.0, 0.5, g);
  EXPECT_DOUBLE_EQ(g, 40.0);
  StepGain(kMuteDb, 0.5, g);
  EXPECT_EQ(g, kMuteDb);
  StepGain(0.0, 0.5, g);
  EXPECT_DOUBLE_EQ(g, kUnmuteFloorDb + 0.5);
}

TEST(StepEnvelope, HoldThenDecay) {
  const EnvelopeRule rule{3.0, 0.5};
  double held = 0.0, timer = 0.0;
  StepEnvelope(8.0, rule, held, timer);
  EXPECT_EQ(held, 8.0);
  for (int i = 0; i < 3; ++i) {
    StepEnvelope(1.0, rule, held, timer);
    EXPECT_EQ(held, 8.0);
  }
  StepEnvelope(1.0, rule, held, timer);
  EXPECT_EQ(held, 4.0);
  StepEnvelope(3.0, rule, held, timer);
  EXPECT_EQ(held, 3.0);  // decay stops at the current power
  StepEnvelope(3.0, rule, held, timer);
  EXPECT_EQ(held, 3.0);  // equal power captures and restarts the hold
  EXPECT_EQ(timer, 3.0);
}

}  // namespace
}  // namespace platt
