#ifndef PLATT_KERNELS_H_
#define PLATT_KERNELS_H_

#include <algorithm>
#include <array>
#include <limits>
#include <span>
#include <vector>

#include "platt/common.h"
#include "platt/filterbank.h"

namespace platt {

// Padded channel stride of sample-major buffers.
inline constexpr int kChannelStride = 80;
inline constexpr double kMuteDb = -std::numeric_limits<double>::infinity();
// Applied gain a channel restarts from when it leaves a mute.
inline constexpr double kUnmuteFloorDb = -100.0;

// Complex band signals of one block, sample-major: sample n of channel c is
// at index n * kChannelStride + c.
struct BandBlock {
  int length = 0;
  std::vector<double> re;
  std::vector<double> im;

  void Resize(int n);
  double Re(int n, int c) const { return re[n * kChannelStride + c]; }
  double Im(int n, int c) const { return im[n * kChannelStride + c]; }
};

// Per-stream streaming state: four cascaded one-pole states per channel and
// the currently applied gain.
struct FilterState {
  std::array<std::array<double, kChannelStride>, 4> re{};
  std::array<std::array<double, kChannelStride>, 4> im{};
  std::array<double, kChannelStride> applied_gain_db{};
  std::array<double, kChannelStride> applied_gain_lin{};

  FilterState();
};

// Max-hold / decay state of the band envelopes on squared magnitudes, one
// lane per channel.
struct EnvelopeState {
  alignas(64) std::array<double, kChannelStride> held_power{};
  alignas(64) std::array<double, kChannelStride> timer{};
};

struct EnvelopeRule {
  double hold_samples = 0.0;
  double decay_power_factor = 1.0;  // per sample, applied once the hold expires
};

// One sample of the hold/decay rule. A power at or above the held value
// replaces it and restarts the hold; after the hold the held value decays
// but never below the current power.
inline void StepEnvelope(double power, const EnvelopeRule& rule, double& held, double& timer) {
  const bool capture = power >= held;
  const bool holding = timer > 0.0;
  const double decayed = std::max(held * rule.decay_power_factor, power);
  held = capture ? power : (holding ? held : decayed);
  timer = capture ? rule.hold_samples : (holding ? timer - 1.0 : timer);
}

// Analysis and synthesis kernels for a designed filterbank. Immutable once
// constructed and safe to share between streams; all mutable state lives in
// FilterState. Subnormal intermediates are flushed to zero (they are two
// orders of magnitude slower and lie far below any audible level), so
// decaying states reach exact zero. Analysis runs in fixed channel groups, in parallel when
// OpenMP provides threads; the synthesis sum has a fixed order, so results
// do not depend on the thread count or on how a stream is split into
// blocks.
class Filterbank {
 public:
  explicit Filterbank(FilterbankSpec spec);

  const FilterbankSpec& spec() const { return spec_; }
  int num_channels() const { return spec_.num_channels(); }

  // Runs the four-fold complex recursion over `block`, scaled by each
  // channel's coefficient, and advances `state`.
  void Analyze(std::span<const double> block, FilterState& state, BandBlock& bands) const;

  // Analysis fused with envelope tracking of the band powers. Only the real
  // parts of `bands` are written; the imaginary parts are unspecified.
  void AnalyzeTracked(std::span<const double> block, FilterState& state,
                      const EnvelopeRule& rule, EnvelopeState& envelope,
                      BandBlock& bands) const;

  // Moves each channel's applied gain toward `target_db` by at most its slew
  // limit per sample, and writes synthesis_scale * sum_c Re(band * gain).
  // A target of kMuteDb silences the channel at once.
  void Synthesize(const BandBlock& bands, const ChannelVector& target_db,
                  FilterState& state, std::span<double> out) const;

 private:
  template <bool kTrack>
  void AnalyzeImpl(std::span<const double> block, FilterState& state, const EnvelopeRule* rule,
                   EnvelopeState* envelope, BandBlock& bands) const;

  FilterbankSpec spec_;
  alignas(64) std::array<double, kChannelStride> pole_re_{};
  alignas(64) std::array<double, kChannelStride> pole_im_{};
  alignas(64) std::array<double, kChannelStride> coeff_re_{};
  alignas(64) std::array<double, kChannelStride> coeff_im_{};
  alignas(64) std::array<double, kChannelStride> max_step_db_{};
  alignas(64) std::array<double, kChannelStride> ramp_up_{};
  alignas(64) std::array<double, kChannelStride> ramp_down_{};
};

// Advances one channel's applied gain by one sample. Shared by the kernels
// and the reference so the slew rule has a single definition.
inline void StepGain(double target_db, double max_step_db, double& gain_db) {
  if (target_db == kMuteDb) {
    gain_db = kMuteDb;
    return;
  }
  if (gain_db == kMuteDb) gain_db = kUnmuteFloorDb;
  const double delta = target_db - gain_db;
  if (delta > max_step_db) {
    gain_db += max_step_db;
  } else if (delta < -max_step_db) {
    gain_db -= max_step_db;
  } else {
    gain_db = target_db;
  }
}

double DbToLinear(double db);

// Straightforward per-channel, per-sample implementations on std::complex.
// Kept as the oracle for the kernels above and as the benchmark baseline.
namespace reference {

void Analyze(const FilterbankSpec& spec, std::span<const double> block,
             FilterState& state, BandBlock& bands);

void Synthesize(const FilterbankSpec& spec, const BandBlock& bands,
                const ChannelVector& target_db, FilterState& state,
                std::span<double> out);

}  // namespace reference
}  // namespace platt

#endif  // PLATT_KERNELS_H_
