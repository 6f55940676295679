#include "platt/kernels.h"

#include <algorithm>
#include <cassert>
#include <cmath>

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

namespace platt {
namespace {

// Channel groups small enough for their recursion states to stay in
// registers across the sample loop.
constexpr int kGroup = 16;
constexpr int kNumGroups = kChannelStride / kGroup;

// Flush-to-zero and denormals-are-zero on the calling thread while in scope.
class ScopedFlushDenormals {
 public:
#if defined(__SSE2__)
  ScopedFlushDenormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040); }
  ~ScopedFlushDenormals() { _mm_setcsr(saved_); }

 private:
  unsigned saved_;
#endif
};

}  // namespace

void BandBlock::Resize(int n) {
  length = n;
  const size_t size = static_cast<size_t>(n) * kChannelStride;
  if (re.size() < size) {
    re.resize(size);
    im.resize(size);
  }
}

FilterState::FilterState() {
  applied_gain_db.fill(0.0);
  applied_gain_lin.fill(1.0);
}

double DbToLinear(double db) {
  if (db == kMuteDb) return 0.0;
  return std::pow(10.0, db / 20.0);
}

Filterbank::Filterbank(FilterbankSpec spec) : spec_(std::move(spec)) {
  for (int c = 0; c < spec_.num_channels(); ++c) {
    const ChannelSpec& ch = spec_.channel(c);
    pole_re_[c] = ch.pole.real();
    pole_im_[c] = ch.pole.imag();
    coeff_re_[c] = ch.coeff.real();
    coeff_im_[c] = ch.coeff.imag();
    max_step_db_[c] = ch.max_gain_step_db;
    ramp_up_[c] = DbToLinear(ch.max_gain_step_db);
    ramp_down_[c] = DbToLinear(-ch.max_gain_step_db);
  }
}

void Filterbank::Analyze(std::span<const double> block, FilterState& state,
                         BandBlock& bands) const {
  AnalyzeImpl<false>(block, state, nullptr, nullptr, bands);
}

void Filterbank::AnalyzeTracked(std::span<const double> block, FilterState& state,
                                const EnvelopeRule& rule, EnvelopeState& envelope,
                                BandBlock& bands) const {
  AnalyzeImpl<true>(block, state, &rule, &envelope, bands);
}

template <bool kTrack>
void Filterbank::AnalyzeImpl(std::span<const double> block, FilterState& state,
                             const EnvelopeRule* rule, EnvelopeState* envelope,
                             BandBlock& bands) const {
  const int length = static_cast<int>(block.size());
  bands.Resize(length);
  double* out_re = bands.re.data();
  double* out_im = bands.im.data();
  const double* x = block.data();

#pragma omp parallel for schedule(static)
  for (int group = 0; group < kNumGroups; ++group) {
    const ScopedFlushDenormals flush;
    const int c0 = group * kGroup;
    alignas(64) double s_re[4][kGroup];
    alignas(64) double s_im[4][kGroup];
    for (int stage = 0; stage < 4; ++stage) {
      for (int k = 0; k < kGroup; ++k) {
        s_re[stage][k] = state.re[stage][c0 + k];
        s_im[stage][k] = state.im[stage][c0 + k];
      }
    }
    alignas(64) double held[kGroup];
    alignas(64) double timer[kGroup];
    if constexpr (kTrack) {
      for (int k = 0; k < kGroup; ++k) {
        held[k] = envelope->held_power[c0 + k];
        timer[k] = envelope->timer[c0 + k];
      }
    }
    const double* p_re = pole_re_.data() + c0;
    const double* p_im = pole_im_.data() + c0;
    const double* b_re = coeff_re_.data() + c0;
    const double* b_im = coeff_im_.data() + c0;
    for (int n = 0; n < length; ++n) {
      const double xn = x[n];
      double* o_re = out_re + static_cast<size_t>(n) * kChannelStride + c0;
      double* o_im = out_im + static_cast<size_t>(n) * kChannelStride + c0;
#pragma omp simd
      for (int k = 0; k < kGroup; ++k) {
        double in_re = xn;
        double in_im = 0.0;
        for (int stage = 0; stage < 4; ++stage) {
          // The pole product does not depend on this sample's input, which
          // keeps the cross-stage dependency to one add.
          const double fb_re = p_re[k] * s_re[stage][k] - p_im[k] * s_im[stage][k];
          const double fb_im = p_re[k] * s_im[stage][k] + p_im[k] * s_re[stage][k];
          const double y_re = in_re + fb_re;
          const double y_im = in_im + fb_im;
          s_re[stage][k] = y_re;
          s_im[stage][k] = y_im;
          in_re = y_re;
          in_im = y_im;
        }
        const double band_re = b_re[k] * in_re - b_im[k] * in_im;
        const double band_im = b_re[k] * in_im + b_im[k] * in_re;
        o_re[k] = band_re;
        if constexpr (kTrack) {
          StepEnvelope(band_re * band_re + band_im * band_im, *rule, held[k], timer[k]);
        } else {
          o_im[k] = band_im;
        }
      }
    }
    if constexpr (kTrack) {
      for (int k = 0; k < kGroup; ++k) {
        envelope->held_power[c0 + k] = held[k];
        envelope->timer[c0 + k] = timer[k];
      }
    }
    for (int stage = 0; stage < 4; ++stage) {
      for (int k = 0; k < kGroup; ++k) {
        state.re[stage][c0 + k] = s_re[stage][k];
        state.im[stage][c0 + k] = s_im[stage][k];
      }
    }
  }
}

void Filterbank::Synthesize(const BandBlock& bands, const ChannelVector& target_db,
                            FilterState& state, std::span<double> out) const {
  const int length = bands.length;
  assert(static_cast<int>(out.size()) >= length);
  // While a channel ramps its linear gain advances by a constant ratio per
  // sample; it snaps to the exact target value on arrival. Padding channels
  // carry zero gain.
  alignas(64) std::array<double, kChannelStride> target_lin{};
  alignas(64) std::array<double, kChannelStride> target{};
  target.fill(0.0);
  for (int c = 0; c < kNumChannels; ++c) {
    target[c] = target_db[c];
    target_lin[c] = DbToLinear(target_db[c]);
    if (target_db[c] == kMuteDb) {
      state.applied_gain_db[c] = kMuteDb;
      state.applied_gain_lin[c] = 0.0;
    } else if (state.applied_gain_db[c] == kMuteDb) {
      state.applied_gain_db[c] = kUnmuteFloorDb;
      state.applied_gain_lin[c] = DbToLinear(kUnmuteFloorDb);
    }
  }
  double* gain_db = state.applied_gain_db.data();
  double* gain_lin = state.applied_gain_lin.data();
  const double* step = max_step_db_.data();
  const double* up = ramp_up_.data();
  const double* down = ramp_down_.data();
  const double scale = spec_.synthesis_scale();
  const ScopedFlushDenormals flush;

  // Settledness depends only on the state, so block splits leave the output
  // bit-identical.
  bool settled = true;
  for (int c = 0; c < kChannelStride; ++c) {
    settled = settled && gain_db[c] == target[c] && gain_lin[c] == target_lin[c];
  }
  int n = 0;
  for (; n < length && !settled; ++n) {
    const double* re = bands.re.data() + static_cast<size_t>(n) * kChannelStride;
    double sum = 0.0;
    int moving = 0;
#pragma omp simd reduction(+ : sum) reduction(| : moving)
    for (int c = 0; c < kChannelStride; ++c) {
      const double g = gain_db[c];
      const double t = target[c];
      const double delta = t - g;
      const double lin = gain_lin[c];
      // Muted channels have g == t == -inf; the nan delta selects arrival.
      const bool rise = delta > step[c];
      const bool fall = delta < -step[c];
      const double g_up = g + step[c];
      const double g_down = g - step[c];
      const double lin_up = lin * up[c];
      const double lin_down = lin * down[c];
      const double next_g = rise ? g_up : (fall ? g_down : t);
      const double arrive_lin = target_lin[c];
      const double next_lin = rise ? lin_up : (fall ? lin_down : arrive_lin);
      moving |= static_cast<int>(rise | fall);
      gain_db[c] = next_g;
      gain_lin[c] = next_lin;
      sum += re[c] * next_lin;
    }
    out[n] = scale * sum;
    settled = !moving;
  }
  // Every channel has arrived: gains stay at their targets for the block.
  for (; n < length; ++n) {
    const double* re = bands.re.data() + static_cast<size_t>(n) * kChannelStride;
    double sum = 0.0;
#pragma omp simd reduction(+ : sum)
    for (int c = 0; c < kChannelStride; ++c) sum += re[c] * gain_lin[c];
    out[n] = scale * sum;
  }
}

}  // namespace platt
