#ifndef PLATT_FILTERBANK_H_
#define PLATT_FILTERBANK_H_

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "platt/common.h"

namespace platt {

// Center frequencies in Hz, equidistant on a Mel scale at half the usual
// MFCC spacing between 64 Hz and 15080 Hz. Entries 2..79 are the channel
// centers (123 Hz to 13943 Hz); the two outer entries on each side only
// enter the bandwidth rule.
inline constexpr std::array<double, kNumChannels + 4> kExtendedCenterFrequencies = {
    64,    93,    123,   155,   187,   221,   256,   293,   330,   370,   410,
    453,   496,   542,   589,   638,   689,   742,   797,   854,   914,   975,
    1039,  1105,  1174,  1245,  1319,  1396,  1476,  1559,  1645,  1734,  1827,
    1923,  2023,  2127,  2235,  2346,  2462,  2583,  2708,  2838,  2972,  3112,
    3257,  3408,  3565,  3727,  3896,  4071,  4253,  4441,  4637,  4840,  5051,
    5270,  5498,  5734,  5979,  6233,  6497,  6771,  7056,  7352,  7658,  7977,
    8307,  8650,  9006,  9376,  9760,  10158, 10572, 11001, 11447, 11909, 12390,
    12888, 13406, 13943, 14501, 15080};

// Standard Mel map m = 2595 log10(1 + f/700), 82 points from 64 Hz to
// 15080 Hz. Reproduces the table above to within a Hz; the table is
// normative.
std::array<double, kNumChannels + 4> GenerateMelFrequencyTable();

// Envelope of the fourth-order cascade impulse response, C(n+3,3) r^n.
double GammatoneEnvelope(double radius, int n);

struct ChannelSpec {
  double center_hz = 0.0;
  double bandwidth_hz = 0.0;  // -10 dB bandwidth
  std::complex<double> pole;
  // Single FIR coefficient: magnitude sets a peak gain of 2, phase aligns
  // neighboring channels.
  std::complex<double> coeff;
  int envelope_peak_delay = 0;  // samples
  // Gain slew limit, 24 dB per period of the center frequency.
  double max_gain_step_db = 0.0;
};

// Immutable design of the 78-channel complex gammatone filterbank.
class FilterbankSpec {
 public:
  FilterbankSpec(double sample_rate, std::vector<ChannelSpec> channels,
                 double synthesis_scale);

  double sample_rate() const { return sample_rate_; }
  int num_channels() const { return static_cast<int>(channels_.size()); }
  const std::vector<ChannelSpec>& channels() const { return channels_; }
  const ChannelSpec& channel(int c) const { return channels_[c]; }
  // Scalar applied to the summed real parts so that the joint passband
  // response is centered on 0 dB.
  double synthesis_scale() const { return synthesis_scale_; }

  // Complex transfer function of one channel including its coefficient.
  std::complex<double> ChannelResponse(int c, double hz) const;
  // Transfer function of synthesis_scale * sum_c Re(band_c).
  std::complex<double> JointResponse(double hz) const;

 private:
  double sample_rate_;
  std::vector<ChannelSpec> channels_;
  double synthesis_scale_;
};

// Designs the filterbank. Throws DesignError for sample rates below
// kMinSampleRate.
FilterbankSpec DesignFilterbank(double sample_rate = kDefaultSampleRate);

struct FlatnessReport {
  double min_db = 0.0;
  double max_db = 0.0;
  double max_abs_db() const;
};

// Joint transfer magnitude range over [lo_hz, hi_hz] on a log-spaced grid.
FlatnessReport JointFlatness(const FilterbankSpec& spec, double lo_hz = 150.0,
                             double hi_hz = 13000.0, int points = 2000);

}  // namespace platt

#endif  // PLATT_FILTERBANK_H_
