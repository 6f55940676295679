#include "platt/evaluation.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "platt/common.h"

namespace platt {

std::vector<double> RecognitionMap::Envelope() const {
  std::vector<double> env(accuracy.cols());
  for (Eigen::Index j = 0; j < accuracy.cols(); ++j) env[j] = accuracy.col(j).maxCoeff();
  return env;
}

RecognitionMap BuildRecognitionMap(std::span<const double> snrs,
                                   std::span<const Eigen::MatrixXd> tokens,
                                   std::span<const int> labels, int num_classes,
                                   const RecognizerConfig& config) {
  const int n = static_cast<int>(snrs.size());
  if (static_cast<int>(tokens.size()) != n || n == 0) {
    throw ConfigError("one token matrix per grid SNR required");
  }
  const Eigen::Index rows = tokens[0].rows();
  const Eigen::Index dims = tokens[0].cols();
  for (const Eigen::MatrixXd& t : tokens) {
    if (t.rows() != rows || t.cols() != dims) {
      throw ConfigError("token matrices must share their shape");
    }
  }
  // Scores are invariant to a common shift of tokens and means; centering
  // keeps the single-precision product accurate.
  Eigen::RowVectorXd center = Eigen::RowVectorXd::Zero(dims);
  for (const Eigen::MatrixXd& t : tokens) center += t.colwise().sum();
  center /= static_cast<double>(rows * n);
  // All test sets stacked as [x^2, x] so that one product scores every
  // test token against every class. With fully pooled variances the x^2
  // term is common to all classes and dropped.
  const bool tied = config.shrinkage == 1.0;
  const Eigen::Index square_cols = tied ? 0 : dims;
  Eigen::MatrixXf stacked(rows * n, square_cols + dims);
  for (int j = 0; j < n; ++j) {
    const Eigen::MatrixXd centered = tokens[j].rowwise() - center;
    if (!tied) stacked.block(j * rows, 0, rows, dims) = centered.cwiseAbs2().cast<float>();
    stacked.block(j * rows, square_cols, rows, dims) = centered.cast<float>();
  }
  RecognitionMap map;
  map.snrs.assign(snrs.begin(), snrs.end());
  map.accuracy.resize(n, n);
  // Every training SNR's classes in one product:
  // -2 log-likelihood = x^2 . p - 2 x . (m p) + (m^2 . p + sum log v).
  Eigen::MatrixXf weights(n * num_classes, square_cols + dims);
  Eigen::RowVectorXf offset(n * num_classes);
  for (int i = 0; i < n; ++i) {
    TemplateRecognizer recognizer(num_classes, config);
    recognizer.Train(tokens[i], labels);
    const Eigen::MatrixXd precision = recognizer.variances().cwiseInverse();
    const Eigen::MatrixXd means = recognizer.means().rowwise() - center;
    if (!tied) weights.block(i * num_classes, 0, num_classes, dims) = precision.cast<float>();
    weights.block(i * num_classes, square_cols, num_classes, dims) =
        (-2.0 * means.cwiseProduct(precision)).cast<float>();
    for (int c = 0; c < num_classes; ++c) {
      offset[i * num_classes + c] = static_cast<float>(
          means.row(c).cwiseAbs2().cwiseProduct(precision.row(c)).sum() +
          recognizer.variances().row(c).array().log().sum());
    }
  }
  Eigen::MatrixXf cost = stacked * weights.transpose();
  cost.rowwise() += offset;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) {
        map.accuracy(i, j) = LeaveOneOutAccuracy(tokens[i], labels, num_classes, config);
        continue;
      }
      int correct = 0;
      for (Eigen::Index t = 0; t < rows; ++t) {
        Eigen::Index best;
        cost.row(j * rows + t).segment(i * num_classes, num_classes).minCoeff(&best);
        correct += best == labels[t];
      }
      map.accuracy(i, j) = static_cast<double>(correct) / rows;
    }
  }
  return map;
}

std::optional<double> SrtFromCurve(std::span<const double> snrs,
                                   std::span<const double> values, double target) {
  if (snrs.size() != values.size() || snrs.empty()) {
    throw ConfigError("SRT curve needs one value per grid SNR");
  }
  for (size_t i = 0; i < values.size(); ++i) {
    if (values[i] < target) continue;
    if (i == 0) return snrs[0];
    const double t = (target - values[i - 1]) / (values[i] - values[i - 1]);
    return snrs[i - 1] + t * (snrs[i] - snrs[i - 1]);
  }
  return std::nullopt;
}

std::optional<double> SrtFromMap(const RecognitionMap& map, double target) {
  const std::vector<double> env = map.Envelope();
  return SrtFromCurve(map.snrs, env, target);
}

namespace {

// Regularized incomplete beta I_x(a, b) by its continued fraction.
double IncompleteBeta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (x > (a + 1.0) / (a + b + 2.0)) return 1.0 - IncompleteBeta(b, a, 1.0 - x);
  const double front =
      std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
               b * std::log1p(-x)) / a;
  constexpr double kTiny = 1e-300;
  double c = 1.0, d = 1.0 - (a + b) * x / (a + 1.0);
  d = 1.0 / (std::abs(d) < kTiny ? kTiny : d);
  double f = d;
  for (int m = 1; m < 500; ++m) {
    for (int half = 0; half < 2; ++half) {
      const double num = half == 0 ? m * (b - m) * x / ((a + 2 * m - 1) * (a + 2 * m))
                                   : -(a + m) * (a + b + m) * x / ((a + 2 * m) * (a + 2 * m + 1));
      d = 1.0 + num * d;
      d = 1.0 / (std::abs(d) < kTiny ? kTiny : d);
      c = 1.0 + num / c;
      if (std::abs(c) < kTiny) c = kTiny;
      f *= c * d;
    }
    if (std::abs(c * d - 1.0) < 1e-15) break;
  }
  return front * f;
}

// P(T > t) for t >= 0.
double StudentUpperTail(double t, double dof) {
  return 0.5 * IncompleteBeta(dof / 2.0, 0.5, dof / (dof + t * t));
}

}  // namespace

double StudentT975(int dof) {
  if (dof < 1) throw ConfigError("t quantile needs at least one degree of freedom");
  // The upper tail decreases in t; the quantile lies in [z, 13) for dof >= 1.
  double lo = 1.959963984540054 - 1e-9, hi = 13.0;
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    (StudentUpperTail(mid, dof) > 0.025 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Summary Summarize(std::span<const double> values) {
  Summary s;
  s.n = static_cast<int>(values.size());
  if (s.n == 0) return s;
  for (double v : values) s.mean += v;
  s.mean /= s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / (s.n - 1));
    s.se = s.sd / std::sqrt(static_cast<double>(s.n));
    const double half = StudentT975(s.n - 1) * s.se;
    s.ci_low = s.mean - half;
    s.ci_high = s.mean + half;
  } else {
    s.ci_low = s.ci_high = s.mean;
  }
  return s;
}

double MeanBenefit(const std::map<double, double>& unaided, const std::map<double, double>& aided,
                   std::span<const double> levels) {
  if (levels.empty()) throw ConfigError("benefit needs at least one level");
  double total = 0.0;
  for (double level : levels) {
    const auto u = unaided.find(level);
    const auto a = aided.find(level);
    if (u == unaided.end() || a == aided.end()) {
      throw ConfigError("benefit level " + std::to_string(level) + " dB SPL missing");
    }
    total += u->second - a->second;
  }
  return total / levels.size();
}

}  // namespace platt
