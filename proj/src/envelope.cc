#include "platt/envelope.h"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cmath>
#include <limits>
#include <numbers>

namespace platt {

double ToDbSpl(double magnitude, const Calibration& calibration) {
  if (magnitude <= 0.0) return -std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(magnitude) + calibration.dbspl_at_fullscale;
}

double RmsToDbSpl(double rms, const Calibration& calibration) {
  return ToDbSpl(rms * std::numbers::sqrt2, calibration);
}

double DbSplToRms(double dbspl, const Calibration& calibration) {
  return std::pow(10.0, (dbspl - calibration.dbspl_at_fullscale) / 20.0) /
         std::numbers::sqrt2;
}

EnvelopeTracker::EnvelopeTracker(const FilterbankSpec& spec, const Calibration& calibration,
                                 const EnvelopeParams& params,
                                 const ThresholdTable& thresholds)
    : calibration_(calibration), thresholds_(thresholds.AtChannels(spec)) {
  const double samples_per_ms = spec.sample_rate() / 1000.0;
  hold_samples_ = static_cast<int>(std::lround(params.hold_ms * samples_per_ms));
  decay_db_per_sample_ = params.decay_db_per_ms / samples_per_ms;
  rule_.hold_samples = hold_samples_;
  rule_.decay_power_factor = std::pow(10.0, -decay_db_per_sample_ / 10.0);
}

void EnvelopeTracker::ProcessPower(std::span<const double> power, int length) {
  double* held = state_.held_power.data();
  double* timer = state_.timer.data();
  for (int n = 0; n < length; ++n) {
    const double* p = power.data() + static_cast<size_t>(n) * kChannelStride;
#pragma omp simd
    for (int c = 0; c < kChannelStride; ++c) StepEnvelope(p[c], rule_, held[c], timer[c]);
  }
}

void EnvelopeTracker::Process(const BandBlock& bands) {
  double* held = state_.held_power.data();
  double* timer = state_.timer.data();
  for (int n = 0; n < bands.length; ++n) {
    const double* re = bands.re.data() + static_cast<size_t>(n) * kChannelStride;
    const double* im = bands.im.data() + static_cast<size_t>(n) * kChannelStride;
#pragma omp simd
    for (int c = 0; c < kChannelStride; ++c) {
      StepEnvelope(re[c] * re[c] + im[c] * im[c], rule_, held[c], timer[c]);
    }
  }
}

void PowerToDb(std::span<const double> power, std::span<double> db) {
  // p = m 2^e with m in [sqrt(1/2), sqrt(2)); ln m = 2 atanh(s),
  // s = (m - 1) / (m + 1), |s| < 0.172, summed to s^25.
  constexpr double kLn2 = std::numbers::ln2;
  constexpr double kDbPerNeper = 10.0 / std::numbers::ln10;
  const size_t n = power.size();
#pragma omp simd
  for (size_t i = 0; i < n; ++i) {
    const uint64_t bits = std::bit_cast<uint64_t>(power[i]);
    double e = static_cast<double>(static_cast<int64_t>((bits >> 52) & 0x7ff) - 1023);
    double m = std::bit_cast<double>((bits & 0x000fffffffffffffull) | 0x3ff0000000000000ull);
    const bool high = m > std::numbers::sqrt2;
    m = high ? 0.5 * m : m;
    e = high ? e + 1.0 : e;
    const double s = (m - 1.0) / (m + 1.0);
    const double s2 = s * s;
    double series = 1.0 / 25.0;
    for (int k = 11; k >= 0; --k) series = series * s2 + 1.0 / (2 * k + 1);
    db[i] = kDbPerNeper * (e * kLn2 + 2.0 * s * series);
  }
  // Zero, subnormal, negative and non-finite inputs take the exact path.
  for (size_t i = 0; i < n; ++i) {
    if (!(power[i] >= std::numeric_limits<double>::min()) || !std::isfinite(power[i])) {
      db[i] = power[i] == 0.0 ? -std::numeric_limits<double>::infinity()
                              : 10.0 * std::log10(power[i]);
    }
  }
}

ChannelVector EnvelopeTracker::Levels() const {
  alignas(64) std::array<double, kChannelStride> db;
  PowerToDb(state_.held_power, db);
  ChannelVector levels;
  for (int c = 0; c < kNumChannels; ++c) {
    levels[c] = std::max(db[c] + calibration_.dbspl_at_fullscale, thresholds_[c]);
  }
  return levels;
}

std::vector<EnvelopeFrame> TrackEnvelope(const FilterbankSpec& spec,
                                         std::span<const ChannelVector> magnitudes,
                                         const Calibration& calibration,
                                         const EnvelopeParams& params) {
  EnvelopeTracker tracker(spec, calibration, params);
  const int samples_per_frame = static_cast<int>(std::lround(spec.sample_rate() / 1000.0));
  std::vector<EnvelopeFrame> frames;
  std::vector<double> power(static_cast<size_t>(samples_per_frame) * kChannelStride);
  const int total = static_cast<int>(magnitudes.size());
  for (int start = 0; start < total; start += samples_per_frame) {
    const int length = std::min(samples_per_frame, total - start);
    for (int n = 0; n < length; ++n) {
      for (int c = 0; c < kNumChannels; ++c) {
        const double m = magnitudes[start + n][c];
        power[static_cast<size_t>(n) * kChannelStride + c] = m * m;
      }
    }
    tracker.ProcessPower(power, length);
    EnvelopeFrame frame;
    frame.timestamp_ms = (start + length) * 1000.0 / spec.sample_rate();
    frame.levels = tracker.Levels();
    frames.push_back(frame);
  }
  return frames;
}

}  // namespace platt
