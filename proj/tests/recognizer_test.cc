#include "platt/recognizer.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace platt {
namespace {

struct Data {
  Eigen::MatrixXd x;
  std::vector<int> labels;
};

// Class means on a scale comparable to the noise, so accuracy is partial.
Data Gaussians(int classes, int per_class, int dims, double separation, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd centers(classes, dims);
  for (Eigen::Index i = 0; i < centers.size(); ++i) centers.data()[i] = separation * n(rng);
  Data d;
  d.x.resize(classes * per_class, dims);
  for (int t = 0; t < classes * per_class; ++t) {
    const int c = t % classes;
    d.labels.push_back(c);
    for (int k = 0; k < dims; ++k) d.x(t, k) = centers(c, k) + (1.0 + 0.5 * (k % 3)) * n(rng);
  }
  return d;
}

double BruteForceLoo(const Data& d, int classes, const RecognizerConfig& config) {
  int correct = 0;
  const Eigen::Index n = d.x.rows();
  for (Eigen::Index held = 0; held < n; ++held) {
    Eigen::MatrixXd train(n - 1, d.x.cols());
    std::vector<int> labels;
    for (Eigen::Index t = 0, r = 0; t < n; ++t) {
      if (t == held) continue;
      train.row(r++) = d.x.row(t);
      labels.push_back(d.labels[t]);
    }
    TemplateRecognizer rec(classes, config);
    rec.Train(train, labels);
    correct += rec.Classify(d.x.row(held))[0] == d.labels[held];
  }
  return static_cast<double>(correct) / n;
}

TEST(LeaveOneOut, ClosedFormEqualsRetraining) {
  for (double shrinkage : {1.0, 0.5, 0.0}) {
    for (uint64_t seed : {1, 2, 3}) {
      const Data d = Gaussians(5, 6, 12, 0.6, seed);
      RecognizerConfig config;
      config.shrinkage = shrinkage;
      config.variance_floor_db2 = 0.05;
      const double fast = LeaveOneOutAccuracy(d.x, d.labels, 5, config);
      EXPECT_DOUBLE_EQ(fast, BruteForceLoo(d, 5, config)) << shrinkage << "/" << seed;
      EXPECT_GT(fast, 0.2);
      EXPECT_LT(fast, 1.0);
    }
  }
}

TEST(Recognizer, LogLikelihoodIsDiagonalGaussian) {
  const Data d = Gaussians(3, 4, 5, 1.0, 4);
  RecognizerConfig config;
  config.shrinkage = 0.3;
  config.variance_floor_db2 = 0.01;
  TemplateRecognizer rec(3, config);
  rec.Train(d.x, d.labels);
  const Eigen::MatrixXd ll = rec.LogLikelihood(d.x);
  for (int t = 0; t < 12; ++t) {
    for (int c = 0; c < 3; ++c) {
      double expected = 0.0;
      for (int k = 0; k < 5; ++k) {
        const double v = rec.variances()(c, k);
        const double e = d.x(t, k) - rec.means()(c, k);
        expected += -0.5 * (e * e / v + std::log(v));
      }
      EXPECT_NEAR(ll(t, c), expected, 1e-9);
    }
  }
}

TEST(Recognizer, SharedVarianceIsPooledWithinClass) {
  const Data d = Gaussians(2, 5, 3, 1.0, 5);
  TemplateRecognizer rec(2, RecognizerConfig{1.0, 1e-9});
  rec.Train(d.x, d.labels);
  for (int k = 0; k < 3; ++k) {
    double sq = 0.0;
    for (int t = 0; t < 10; ++t) {
      const double e = d.x(t, k) - rec.means()(d.labels[t], k);
      sq += e * e;
    }
    EXPECT_NEAR(rec.variances()(0, k), sq / 8.0, 1e-12);
    EXPECT_EQ(rec.variances()(0, k), rec.variances()(1, k));
  }
}

TEST(Recognizer, SeparableDataIsRecognized) {
  const Data train = Gaussians(10, 10, 20, 5.0, 6);
  TemplateRecognizer rec(10);
  rec.Train(train.x, train.labels);
  EXPECT_EQ(Accuracy(rec, train.x, train.labels), 1.0);
  EXPECT_EQ(LeaveOneOutAccuracy(train.x, train.labels, 10), 1.0);
}

TEST(Recognizer, TrainingErrors) {
  Data d = Gaussians(3, 2, 4, 1.0, 7);
  TemplateRecognizer rec(3);
  EXPECT_THROW(rec.LogLikelihood(d.x), ConfigError);  // untrained
  EXPECT_NO_THROW(rec.Train(d.x, d.labels));
  EXPECT_THROW(LeaveOneOutAccuracy(d.x, d.labels, 3), ConfigError);  // two per class
  d.labels[0] = 1;  // class 0 now has a single token
  EXPECT_THROW(rec.Train(d.x, d.labels), ConfigError);
  d.labels[0] = 7;
  EXPECT_THROW(rec.Train(d.x, d.labels), ConfigError);
  EXPECT_THROW(rec.Train(d.x, std::vector<int>{0, 1}), ConfigError);
  EXPECT_THROW(TemplateRecognizer(1), ConfigError);
  EXPECT_THROW(TemplateRecognizer(3, RecognizerConfig{1.5, 1.0}), ConfigError);
  EXPECT_THROW(TemplateRecognizer(3, RecognizerConfig{0.5, 0.0}), ConfigError);
}

TEST(TokenMatrix, FlattensAlignedFrames) {
  FeatureMatrix f(10, 2, 10.0, {100.0, 200.0});
  for (size_t i = 0; i < f.data.size(); ++i) f.data[i] = static_cast<double>(i);
  const Eigen::MatrixXd m = TokenMatrix(f, 3, 3, 2);
  ASSERT_EQ(m.rows(), 3);
  ASSERT_EQ(m.cols(), 4);
  EXPECT_EQ(m(0, 0), 0.0);
  EXPECT_EQ(m(0, 3), 3.0);
  EXPECT_EQ(m(1, 0), f.at(3, 0));
  EXPECT_EQ(m(2, 3), f.at(7, 1));
  EXPECT_THROW(TokenMatrix(f, 4, 3, 2), ConfigError);
  EXPECT_THROW(TokenMatrix(f, 2, 2, 3), ConfigError);
}

}  // namespace
}  // namespace platt
