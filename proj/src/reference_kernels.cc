#include <complex>

#include "platt/kernels.h"

namespace platt::reference {

void Analyze(const FilterbankSpec& spec, std::span<const double> block,
             FilterState& state, BandBlock& bands) {
  const int length = static_cast<int>(block.size());
  bands.Resize(length);
  for (int c = 0; c < spec.num_channels(); ++c) {
    const std::complex<double> pole = spec.channel(c).pole;
    const std::complex<double> coeff = spec.channel(c).coeff;
    std::complex<double> s[4];
    for (int stage = 0; stage < 4; ++stage) {
      s[stage] = {state.re[stage][c], state.im[stage][c]};
    }
    for (int n = 0; n < length; ++n) {
      std::complex<double> y = block[n];
      for (int stage = 0; stage < 4; ++stage) {
        s[stage] = y + pole * s[stage];
        y = s[stage];
      }
      y *= coeff;
      bands.re[n * kChannelStride + c] = y.real();
      bands.im[n * kChannelStride + c] = y.imag();
    }
    for (int stage = 0; stage < 4; ++stage) {
      state.re[stage][c] = s[stage].real();
      state.im[stage][c] = s[stage].imag();
    }
  }
}

void Synthesize(const FilterbankSpec& spec, const BandBlock& bands,
                const ChannelVector& target_db, FilterState& state,
                std::span<double> out) {
  for (int n = 0; n < bands.length; ++n) {
    double sum = 0.0;
    for (int c = 0; c < spec.num_channels(); ++c) {
      StepGain(target_db[c], spec.channel(c).max_gain_step_db, state.applied_gain_db[c]);
      sum += bands.Re(n, c) * DbToLinear(state.applied_gain_db[c]);
    }
    out[n] = spec.synthesis_scale() * sum;
  }
  for (int c = 0; c < spec.num_channels(); ++c) {
    state.applied_gain_lin[c] = DbToLinear(state.applied_gain_db[c]);
  }
}

}  // namespace platt::reference
