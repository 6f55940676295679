#ifndef PLATT_TESTS_TEST_UTIL_H_
#define PLATT_TESTS_TEST_UTIL_H_

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "platt/common.h"

namespace platt::testing {

inline std::string DataPath(const std::string& name) {
  return std::string(PLATT_TEST_DATA_DIR) + "/" + name;
}

inline std::vector<double> WhiteNoise(size_t n, double rms, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, rms);
  std::vector<double> x(n);
  for (double& v : x) v = normal(rng);
  return x;
}

inline ChannelVector RandomLevels(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  ChannelVector v;
  for (double& x : v) x = u(rng);
  return v;
}

inline double Rms(const std::vector<double>& x, size_t first = 0) {
  double sum = 0.0;
  for (size_t i = first; i < x.size(); ++i) sum += x[i] * x[i];
  return std::sqrt(sum / static_cast<double>(x.size() - first));
}

}  // namespace platt::testing

#endif  // PLATT_TESTS_TEST_UTIL_H_
