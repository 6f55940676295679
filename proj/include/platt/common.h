#ifndef PLATT_COMMON_H_
#define PLATT_COMMON_H_

#include <array>
#include <stdexcept>
#include <string>

namespace platt {

inline constexpr int kNumChannels = 78;
inline constexpr double kDefaultSampleRate = 48000.0;
inline constexpr double kMinSampleRate = 32000.0;

// One value per filterbank channel (levels, gains or factors).
using ChannelVector = std::array<double, kNumChannels>;

// Error categories map onto distinct CLI exit codes.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filter design or other numerical failure.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DesignError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

inline ChannelVector Filled(double value) {
  ChannelVector v;
  v.fill(value);
  return v;
}

}  // namespace platt

#endif  // PLATT_COMMON_H_
