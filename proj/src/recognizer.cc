#include "platt/recognizer.h"

#include <cmath>
#include <limits>
#include <string>

namespace platt {

TemplateRecognizer::TemplateRecognizer(int num_classes, const RecognizerConfig& config)
    : num_classes_(num_classes), config_(config) {
  if (num_classes < 2) throw ConfigError("a recognizer needs at least two classes");
  if (!(config.shrinkage >= 0.0 && config.shrinkage <= 1.0) ||
      !(config.variance_floor_db2 > 0.0)) {
    throw ConfigError("shrinkage must lie in [0, 1] and the variance floor must be positive");
  }
}

void TemplateRecognizer::Train(const Eigen::MatrixXd& features, std::span<const int> labels) {
  if (static_cast<size_t>(features.rows()) != labels.size()) {
    throw ConfigError("one label per token required");
  }
  const Eigen::Index dims = features.cols();
  std::vector<int> count(num_classes_, 0);
  means_ = Eigen::MatrixXd::Zero(num_classes_, dims);
  for (Eigen::Index t = 0; t < features.rows(); ++t) {
    const int label = labels[t];
    if (label < 0 || label >= num_classes_) throw ConfigError("label out of range");
    means_.row(label) += features.row(t);
    ++count[label];
  }
  for (int c = 0; c < num_classes_; ++c) {
    if (count[c] < 2) {
      throw ConfigError("insufficient training tokens for class " + std::to_string(c));
    }
    means_.row(c) /= count[c];
  }
  Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(num_classes_, dims);
  for (Eigen::Index t = 0; t < features.rows(); ++t) {
    sq.row(labels[t]) += (features.row(t) - means_.row(labels[t])).array().square().matrix();
  }
  const Eigen::RowVectorXd pooled =
      sq.colwise().sum() / static_cast<double>(features.rows() - num_classes_);
  variances_.resize(num_classes_, dims);
  for (int c = 0; c < num_classes_; ++c) {
    const Eigen::RowVectorXd own = sq.row(c) / static_cast<double>(count[c] - 1);
    variances_.row(c) = ((1.0 - config_.shrinkage) * own + config_.shrinkage * pooled)
                            .array()
                            .max(config_.variance_floor_db2)
                            .matrix();
  }
}

Eigen::MatrixXd TemplateRecognizer::LogLikelihood(const Eigen::MatrixXd& features) const {
  if (means_.size() == 0) throw ConfigError("recognizer is not trained");
  if (features.cols() != means_.cols()) throw ConfigError("feature dimension mismatch");
  // -0.5 sum_d (x - m)^2 / v + log v, expanded into products.
  const Eigen::MatrixXd precision = variances_.cwiseInverse();
  const Eigen::MatrixXd weighted_mean = means_.cwiseProduct(precision);
  Eigen::VectorXd constant(num_classes_);
  for (int c = 0; c < num_classes_; ++c) {
    constant[c] = (means_.row(c).cwiseProduct(weighted_mean.row(c))).sum() +
                  variances_.row(c).array().log().sum();
  }
  Eigen::MatrixXd ll = features.cwiseAbs2() * precision.transpose();
  ll.noalias() -= 2.0 * features * weighted_mean.transpose();
  ll.rowwise() += constant.transpose();
  return -0.5 * ll;
}

std::vector<int> TemplateRecognizer::Classify(const Eigen::MatrixXd& features) const {
  const Eigen::MatrixXd ll = LogLikelihood(features);
  std::vector<int> out(ll.rows());
  for (Eigen::Index t = 0; t < ll.rows(); ++t) {
    Eigen::Index best;
    ll.row(t).maxCoeff(&best);
    out[t] = static_cast<int>(best);
  }
  return out;
}

double Accuracy(const TemplateRecognizer& recognizer, const Eigen::MatrixXd& features,
                std::span<const int> labels) {
  const std::vector<int> predicted = recognizer.Classify(features);
  int correct = 0;
  for (size_t t = 0; t < predicted.size(); ++t) correct += predicted[t] == labels[t];
  return predicted.empty() ? 0.0 : static_cast<double>(correct) / predicted.size();
}

double LeaveOneOutAccuracy(const Eigen::MatrixXd& features, std::span<const int> labels,
                           int num_classes, const RecognizerConfig& config) {
  // Closed-form downdate of the class statistics per held-out token; equal
  // to retraining without it.
  TemplateRecognizer full(num_classes, config);
  full.Train(features, labels);
  const Eigen::Index n = features.rows();
  const Eigen::Index dims = features.cols();
  std::vector<int> count(num_classes, 0);
  for (int label : labels) ++count[label];
  for (int c = 0; c < num_classes; ++c) {
    if (count[c] < 3) throw ConfigError("leave-one-out needs three tokens per class");
  }
  const Eigen::MatrixXd& means = full.means();
  Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(num_classes, dims);
  for (Eigen::Index t = 0; t < n; ++t) {
    sq.row(labels[t]) += (features.row(t) - means.row(labels[t])).array().square().matrix();
  }
  const Eigen::RowVectorXd total_sq = sq.colwise().sum();
  const double s = config.shrinkage;
  const double pooled_dof = static_cast<double>(n - 1 - num_classes);
  // Row-major copies keep each token and class contiguous.
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMajor x_rows = features;
  const RowMajor mean_rows = means;
  const RowMajor sq_rows = sq;
  int correct = 0;
  const bool tied = s == 1.0;
  std::vector<double> removed(dims), pooled(dims), inv_var(dims);
  for (Eigen::Index t = 0; t < n; ++t) {
    const int c = labels[t];
    const double nc = count[c];
    const double* x = x_rows.row(t).data();
    const double* mc = mean_rows.row(c).data();
    for (Eigen::Index k = 0; k < dims; ++k) {
      const double d = x[k] - mc[k];
      removed[k] = nc / (nc - 1.0) * d * d;
      pooled[k] = (total_sq[k] - removed[k]) / pooled_dof;
    }
    if (tied) {
      for (Eigen::Index k = 0; k < dims; ++k) {
        inv_var[k] = 1.0 / std::max(pooled[k], config.variance_floor_db2);
      }
    }
    double best = -std::numeric_limits<double>::infinity();
    int best_class = -1;
    for (int j = 0; j < num_classes; ++j) {
      const bool own = j == c;
      const double shift = own ? 1.0 / (nc - 1.0) : 0.0;
      const double* mj = mean_rows.row(j).data();
      double quad = 0.0, logdet = 0.0;
      if (tied) {
        // The determinant is common to all classes.
#pragma omp simd reduction(+ : quad)
        for (Eigen::Index k = 0; k < dims; ++k) {
          const double e = x[k] - mj[k] + shift * (x[k] - mc[k]);
          quad += e * e * inv_var[k];
        }
      } else {
        const double own_scale = own ? 1.0 : 0.0;
        const double own_dof = own ? nc - 2.0 : count[j] - 1.0;
        const double* sj = sq_rows.row(j).data();
        for (Eigen::Index k = 0; k < dims; ++k) {
          const double own_sq = sj[k] - own_scale * removed[k];
          const double v = std::max((1.0 - s) * own_sq / own_dof + s * pooled[k],
                                    config.variance_floor_db2);
          const double e = x[k] - mj[k] + shift * (x[k] - mc[k]);
          quad += e * e / v;
          logdet += std::log(v);
        }
      }
      const double ll = -0.5 * (quad + logdet);
      if (ll > best) {
        best = ll;
        best_class = j;
      }
    }
    correct += best_class == c;
  }
  return static_cast<double>(correct) / n;
}

Eigen::MatrixXd TokenMatrix(const FeatureMatrix& features, int tokens, int slot_frames,
                            int token_frames) {
  if (token_frames > slot_frames || (tokens - 1) * slot_frames + token_frames > features.frames) {
    throw ConfigError("feature matrix too short for the token layout");
  }
  const int dims = token_frames * features.channels;
  Eigen::MatrixXd out(tokens, dims);
  for (int t = 0; t < tokens; ++t) {
    const double* src =
        features.data.data() + static_cast<size_t>(t) * slot_frames * features.channels;
    for (int d = 0; d < dims; ++d) out(t, d) = src[d];
  }
  return out;
}

}  // namespace platt
