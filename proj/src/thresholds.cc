#include "platt/thresholds.h"

#include <algorithm>
#include <cmath>

namespace platt {

ThresholdTable::ThresholdTable(std::vector<double> frequencies_hz,
                               std::vector<double> thresholds_db)
    : frequencies_(std::move(frequencies_hz)), thresholds_(std::move(thresholds_db)) {
  if (frequencies_.size() != thresholds_.size() || frequencies_.size() < 2) {
    throw ConfigError("threshold table needs at least two (frequency, level) pairs");
  }
  if (!std::is_sorted(frequencies_.begin(), frequencies_.end()) ||
      std::adjacent_find(frequencies_.begin(), frequencies_.end()) != frequencies_.end()) {
    throw ConfigError("threshold table frequencies must be strictly increasing");
  }
}

const ThresholdTable& ThresholdTable::Iso226() {
  static const ThresholdTable table(
      {20,   25,   31.5, 40,   50,   63,   80,   100,  125,  160,  200,
       250,  315,  400,  500,  630,  800,  1000, 1250, 1600, 2000, 2500,
       3150, 4000, 5000, 6300, 8000, 10000, 12500, 14000, 16000},
      {78.5, 68.7, 59.5, 51.1, 44.0, 37.5, 31.5, 26.5, 22.1, 17.9, 14.4,
       11.4, 8.6,  6.2,  4.4,  3.0,  2.2,  2.4,  3.5,  1.7,  -1.3, -4.2,
       -6.0, -5.4, -1.5, 6.0,  12.6, 13.9, 12.3, 18.4, 40.2});
  return table;
}

double ThresholdTable::At(double hz) const {
  if (hz <= frequencies_.front()) return thresholds_.front();
  if (hz >= frequencies_.back()) return thresholds_.back();
  const auto upper = std::upper_bound(frequencies_.begin(), frequencies_.end(), hz);
  const size_t i = static_cast<size_t>(upper - frequencies_.begin());
  const double t = std::log(hz / frequencies_[i - 1]) /
                   std::log(frequencies_[i] / frequencies_[i - 1]);
  return thresholds_[i - 1] + t * (thresholds_[i] - thresholds_[i - 1]);
}

std::vector<double> ThresholdTable::At(std::span<const double> hz) const {
  std::vector<double> out(hz.size());
  std::transform(hz.begin(), hz.end(), out.begin(), [this](double f) { return At(f); });
  return out;
}

ChannelVector ThresholdTable::AtChannels(const FilterbankSpec& spec) const {
  ChannelVector out;
  for (int c = 0; c < kNumChannels; ++c) out[c] = At(spec.channel(c).center_hz);
  return out;
}

}  // namespace platt
