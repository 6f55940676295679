#include "platt/filterbank.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace platt {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double MelOf(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double HzOfMel(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

double PoleRadius(double bandwidth_hz) {
  return 1.0 - 1.0 / (std::numbers::sqrt2 * 10000.0 / bandwidth_hz + 0.5);
}

// Argmax over n >= 0 of C(n+3,3)^power * radius_product^n. The sequence is
// unimodal, so walk while the ratio of successive terms exceeds one.
int EnvelopePeak(double radius_product, int power) {
  int n = 0;
  while (true) {
    const double growth = std::pow((n + 4.0) / (n + 1.0), power) * radius_product;
    if (growth <= 1.0) return n;
    ++n;
  }
}

}  // namespace

std::array<double, kNumChannels + 4> GenerateMelFrequencyTable() {
  std::array<double, kNumChannels + 4> table;
  const double lo = MelOf(kExtendedCenterFrequencies.front());
  const double hi = MelOf(kExtendedCenterFrequencies.back());
  const int n = static_cast<int>(table.size());
  for (int i = 0; i < n; ++i) {
    table[i] = HzOfMel(lo + (hi - lo) * i / (n - 1));
  }
  return table;
}

double GammatoneEnvelope(double radius, int n) {
  return (n + 1.0) * (n + 2.0) * (n + 3.0) / 6.0 * std::pow(radius, n);
}

FilterbankSpec::FilterbankSpec(double sample_rate, std::vector<ChannelSpec> channels,
                               double synthesis_scale)
    : sample_rate_(sample_rate),
      channels_(std::move(channels)),
      synthesis_scale_(synthesis_scale) {}

std::complex<double> FilterbankSpec::ChannelResponse(int c, double hz) const {
  const ChannelSpec& ch = channels_[c];
  const std::complex<double> z_inv = std::polar(1.0, -kTwoPi * hz / sample_rate_);
  const std::complex<double> denom = 1.0 - ch.pole * z_inv;
  const std::complex<double> d2 = denom * denom;
  return ch.coeff / (d2 * d2);
}

std::complex<double> FilterbankSpec::JointResponse(double hz) const {
  std::complex<double> sum = 0.0;
  for (int c = 0; c < num_channels(); ++c) {
    // Real part of a complex impulse response: (H(w) + conj(H(-w))) / 2.
    sum += 0.5 * (ChannelResponse(c, hz) + std::conj(ChannelResponse(c, -hz)));
  }
  return synthesis_scale_ * sum;
}

FilterbankSpec DesignFilterbank(double sample_rate) {
  if (!(sample_rate >= kMinSampleRate)) {
    throw DesignError("sample rate " + std::to_string(sample_rate) +
                      " Hz is below the minimum of " + std::to_string(kMinSampleRate) +
                      " Hz");
  }
  const auto& f = kExtendedCenterFrequencies;
  std::vector<ChannelSpec> channels(kNumChannels);
  for (int c = 0; c < kNumChannels; ++c) {
    ChannelSpec& ch = channels[c];
    ch.center_hz = f[c + 2];
    ch.bandwidth_hz = f[c + 4] - f[c];
    const double radius = PoleRadius(ch.bandwidth_hz);
    ch.pole = std::polar(radius, kTwoPi * ch.center_hz / sample_rate);
    ch.envelope_peak_delay = EnvelopePeak(radius, 1);
    ch.max_gain_step_db = 24.0 * ch.center_hz / sample_rate;
  }

  // Phase of the response of channel c at delay n is arg(coeff_c) + n*theta_c.
  // Neighbors are made equal at the delay where their envelope product peaks;
  // the first channel is real and positive at its own envelope peak.
  std::vector<double> phase(kNumChannels);
  phase[0] = -channels[0].envelope_peak_delay * std::arg(channels[0].pole);
  for (int c = 0; c + 1 < kNumChannels; ++c) {
    const double rr = std::abs(channels[c].pole) * std::abs(channels[c + 1].pole);
    const int n = EnvelopePeak(rr, 2);
    phase[c + 1] =
        phase[c] + n * (std::arg(channels[c].pole) - std::arg(channels[c + 1].pole));
  }
  for (int c = 0; c < kNumChannels; ++c) {
    const double one_minus_r = 1.0 - std::abs(channels[c].pole);
    // Peak of |1/(1 - p z^-1)|^4 is 1/(1-r)^4 at the pole angle.
    const double magnitude = 2.0 * std::pow(one_minus_r, 4);
    channels[c].coeff = std::polar(magnitude, std::remainder(phase[c], kTwoPi));
  }

  FilterbankSpec unscaled(sample_rate, channels, 1.0);
  const FlatnessReport raw = JointFlatness(unscaled);
  const double scale = std::pow(10.0, -(raw.min_db + raw.max_db) / 40.0);
  return FilterbankSpec(sample_rate, std::move(channels), scale);
}

double FlatnessReport::max_abs_db() const {
  return std::max(std::abs(min_db), std::abs(max_db));
}

FlatnessReport JointFlatness(const FilterbankSpec& spec, double lo_hz, double hi_hz,
                             int points) {
  FlatnessReport report{1e300, -1e300};
  for (int i = 0; i < points; ++i) {
    const double hz = lo_hz * std::pow(hi_hz / lo_hz, static_cast<double>(i) / (points - 1));
    const double db = 20.0 * std::log10(std::abs(spec.JointResponse(hz)));
    report.min_db = std::min(report.min_db, db);
    report.max_db = std::max(report.max_db, db);
  }
  return report;
}

}  // namespace platt
