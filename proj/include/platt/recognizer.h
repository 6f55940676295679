#ifndef PLATT_RECOGNIZER_H_
#define PLATT_RECOGNIZER_H_

#include <span>
#include <vector>

#include <Eigen/Core>

#include "platt/hearing_sim.h"

namespace platt {

struct RecognizerConfig {
  // Class variances are blended with the pooled within-class variance:
  // v = (1 - shrinkage) v_class + shrinkage v_pooled.
  double shrinkage = 1.0;
  double variance_floor_db2 = 1.0;
};

// One diagonal Gaussian per word over fixed-length, time-aligned feature
// matrices flattened to vectors.
class TemplateRecognizer {
 public:
  TemplateRecognizer(int num_classes, const RecognizerConfig& config = {});

  // Rows of `features` are tokens. Every class needs at least two tokens;
  // throws ConfigError otherwise.
  void Train(const Eigen::MatrixXd& features, std::span<const int> labels);

  // tokens x classes log-likelihoods.
  Eigen::MatrixXd LogLikelihood(const Eigen::MatrixXd& features) const;
  std::vector<int> Classify(const Eigen::MatrixXd& features) const;

  int num_classes() const { return num_classes_; }
  const Eigen::MatrixXd& means() const { return means_; }
  const Eigen::MatrixXd& variances() const { return variances_; }

 private:
  int num_classes_;
  RecognizerConfig config_;
  Eigen::MatrixXd means_;      // classes x dims
  Eigen::MatrixXd variances_;  // classes x dims
};

double Accuracy(const TemplateRecognizer& recognizer, const Eigen::MatrixXd& features,
                std::span<const int> labels);

// Each token is classified by templates trained on all other tokens.
// Every class needs at least three tokens.
double LeaveOneOutAccuracy(const Eigen::MatrixXd& features, std::span<const int> labels,
                           int num_classes, const RecognizerConfig& config = {});

// Token t is frames [t * slot_frames, t * slot_frames + token_frames),
// flattened row-major. Throws ConfigError if the features are too short.
Eigen::MatrixXd TokenMatrix(const FeatureMatrix& features, int tokens, int slot_frames,
                            int token_frames);

}  // namespace platt

#endif  // PLATT_RECOGNIZER_H_
