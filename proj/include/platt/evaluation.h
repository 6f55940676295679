#ifndef PLATT_EVALUATION_H_
#define PLATT_EVALUATION_H_

#include <map>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "platt/recognizer.h"

namespace platt {

// Word accuracy per (training SNR, test SNR); the same grid on both axes.
struct RecognitionMap {
  std::vector<double> snrs;
  Eigen::MatrixXd accuracy;  // rows: training SNR, columns: test SNR

  // Best accuracy over training SNRs at each test SNR.
  std::vector<double> Envelope() const;
};

// Features of the same labelled tokens at every grid SNR. Off-diagonal
// cells train on one SNR and test on another; diagonal cells use
// leave-one-out within the SNR.
RecognitionMap BuildRecognitionMap(std::span<const double> snrs,
                                   std::span<const Eigen::MatrixXd> tokens,
                                   std::span<const int> labels, int num_classes,
                                   const RecognizerConfig& config = {});

// Lowest SNR at which `values` reach `target`, scanning upward and
// interpolating linearly between the grid points that bracket the first
// crossing. A curve already at target on the first grid point yields that
// point. Empty when the target is never reached.
std::optional<double> SrtFromCurve(std::span<const double> snrs,
                                   std::span<const double> values, double target);
std::optional<double> SrtFromMap(const RecognitionMap& map, double target);

// Mean, sample standard deviation and two-sided 95% Student-t interval.
struct Summary {
  int n = 0;
  double mean = 0.0;
  double sd = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};
Summary Summarize(std::span<const double> values);

// 0.975 quantile of Student's t with `dof` degrees of freedom.
double StudentT975(int dof);

// Mean of unaided - aided SRT over `levels`; both maps are keyed by level
// in dB SPL. Throws ConfigError if a level is missing from either curve.
double MeanBenefit(const std::map<double, double>& unaided, const std::map<double, double>& aided,
                   std::span<const double> levels);

}  // namespace platt

#endif  // PLATT_EVALUATION_H_
