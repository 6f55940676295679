#ifndef PLATT_THRESHOLDS_H_
#define PLATT_THRESHOLDS_H_

#include <span>
#include <vector>

#include "platt/common.h"
#include "platt/filterbank.h"

namespace platt {

// Normal-hearing threshold of hearing in dB SPL as a function of frequency,
// interpolated linearly in log frequency between tabulated points. The
// default table is the ISO 226:2003 free-field threshold (20 Hz - 12.5 kHz),
// extended with the ISO 389-7:2005 free-field values at 14 and 16 kHz.
class ThresholdTable {
 public:
  ThresholdTable(std::vector<double> frequencies_hz, std::vector<double> thresholds_db);

  static const ThresholdTable& Iso226();

  // Clamped to the end values outside the tabulated range.
  double At(double hz) const;
  std::vector<double> At(std::span<const double> hz) const;
  ChannelVector AtChannels(const FilterbankSpec& spec) const;

  const std::vector<double>& frequencies() const { return frequencies_; }
  const std::vector<double>& thresholds() const { return thresholds_; }

 private:
  std::vector<double> frequencies_;
  std::vector<double> thresholds_;
};

}  // namespace platt

#endif  // PLATT_THRESHOLDS_H_
