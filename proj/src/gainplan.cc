#include "platt/gainplan.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace platt {
namespace {

using VecMap = Eigen::Map<Eigen::Matrix<double, kNumChannels, 1>>;
using ConstVecMap = Eigen::Map<const Eigen::Matrix<double, kNumChannels, 1>>;

double LogInterp(double hz, double f0, double v0, double f1, double v1) {
  const double t = std::log(hz / f0) / std::log(f1 / f0);
  return v0 + t * (v1 - v0);
}

double DefaultLowerLimit(double hz) {
  if (hz < 250.0) return 30.0;
  if (hz < 500.0) return LogInterp(hz, 250.0, 30.0, 500.0, 25.0);
  if (hz <= 4000.0) return 25.0;
  if (hz <= 8000.0) return LogInterp(hz, 4000.0, 25.0, 8000.0, 30.0);
  return 30.0;
}

}  // namespace

DynamicRange DynamicRange::Uniform(double lower_db, double upper_db) {
  return DynamicRange{Filled(lower_db), Filled(upper_db)};
}

DynamicRange DynamicRange::DefaultInput(const FilterbankSpec& spec) {
  DynamicRange range;
  for (int c = 0; c < kNumChannels; ++c) {
    range.lower[c] = DefaultLowerLimit(spec.channel(c).center_hz);
    range.upper[c] = 105.0;
  }
  return range;
}

void DynamicRange::Validate() const {
  for (int c = 0; c < kNumChannels; ++c) {
    if (!std::isfinite(lower[c]) || !std::isfinite(upper[c]) || !(lower[c] < upper[c])) {
      throw ConfigError("dynamic range at channel " + std::to_string(c) +
                        " must satisfy lower < upper (got " + std::to_string(lower[c]) +
                        ", " + std::to_string(upper[c]) + ")");
    }
  }
}

PlattConfig PlattConfig::Default(const FilterbankSpec& spec) {
  PlattConfig config;
  config.input_dr = DynamicRange::DefaultInput(spec);
  config.output_dr = config.input_dr;
  return config;
}

void PlattConfig::Validate() const {
  if (!(expansion >= 1.0 && expansion <= 16.0)) {
    throw ConfigError("expansion factor must lie in [1, 16], got " +
                      std::to_string(expansion));
  }
  input_dr.Validate();
  output_dr.Validate();
  for (int w : smoothing_widths) {
    if (w < 2 || w > 2 * BandedSmoother::kPad) {
      throw ConfigError("smoothing width out of range: " + std::to_string(w));
    }
  }
  for (int f : propagation_fwhm) {
    if (f < 1 || f > kNumChannels) {
      throw ConfigError("propagation FWHM out of range: " + std::to_string(f));
    }
  }
}

ChannelVector LayerDecomposition::Reconstruct() const {
  ChannelVector out = base;
  for (const ChannelVector& d : diff) {
    for (int c = 0; c < kNumChannels; ++c) out[c] += d[c];
  }
  return out;
}

Eigen::MatrixXd SmoothingMatrix(int width, int size) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size, size);
  for (int j = 0; j < size; ++j) {
    double total = 0.0;
    for (int i = 0; i < size; ++i) {
      const int k = i - j;
      if (2 * std::abs(k) >= width) continue;
      const double w = 0.5 + 0.5 * std::cos(2.0 * std::numbers::pi * k / width);
      m(j, i) = w;
      total += w;
    }
    m.row(j) /= total;
  }
  return m;
}

ChannelVector Smooth(const ChannelVector& levels, int width) {
  const Eigen::MatrixXd m = SmoothingMatrix(width);
  ChannelVector out;
  VecMap(out.data()) = m * ConstVecMap(levels.data());
  return out;
}

LayerDecomposition Decompose(const ChannelVector& levels, const PlattConfig& config) {
  return GainPlanner(config).Decompose(levels);
}

ChannelVector MapBase(const ChannelVector& base, const DynamicRange& input_dr,
                      const DynamicRange& output_dr, BaseMap mode) {
  if (mode == BaseMap::kIdentity) return base;
  ChannelVector out;
  for (int c = 0; c < kNumChannels; ++c) {
    const double lo = input_dr.lower[c];
    const double hi = input_dr.upper[c];
    const double t = (std::clamp(base[c], lo, hi) - lo) / (hi - lo);
    out[c] = output_dr.lower[c] + t * (output_dr.upper[c] - output_dr.lower[c]);
  }
  return out;
}

ChannelVector LocalFactors(const ChannelVector& current, const ChannelVector& diff,
                           const DynamicRange& range) {
  ChannelVector alpha;
#pragma omp simd
  for (int c = 0; c < kNumChannels; ++c) {
    const double d = diff[c];
    // A zero difference divides by one and is forced to 1 below.
    const double limit = d > 0.0 ? range.upper[c] : range.lower[c];
    const double ratio = (limit - current[c]) / (d == 0.0 ? 1.0 : d);
    const double clamped = std::min(std::max(ratio, 0.0), 1.0);
    alpha[c] = d == 0.0 ? 1.0 : clamped;
  }
  return alpha;
}

ChannelVector PropagateFactors(const ChannelVector& local, int fwhm) {
  return FactorPropagator(fwhm).Apply(local);
}

ChannelVector ConditionalFactors(const ChannelVector& current, const ChannelVector& diff,
                                 const DynamicRange& range, int fwhm) {
  return PropagateFactors(LocalFactors(current, diff, range), fwhm);
}

BandedSmoother::BandedSmoother(int width) {
  if (width < 2 || width > 2 * kPad) {
    throw ConfigError("smoothing width out of range: " + std::to_string(width));
  }
  half_ = (width - 1) / 2;
  taps_.resize(2 * half_ + 1);
  for (int k = -half_; k <= half_; ++k) {
    taps_[k + half_] = 0.5 + 0.5 * std::cos(2.0 * std::numbers::pi * k / width);
  }
  for (int j = 0; j < kNumChannels; ++j) {
    double total = 0.0;
    for (int k = -half_; k <= half_; ++k) {
      if (j + k >= 0 && j + k < kNumChannels) total += taps_[k + half_];
    }
    inv_norm_[j] = 1.0 / total;
  }
}

void BandedSmoother::Apply(const Padded& x, ChannelVector& out) const {
  // Symmetric taps: one multiply per tap pair, accumulated in registers for
  // blocks of eight output channels.
  constexpr int kBlock = 8;
  const double* src = x.data() + kPad;
  const double center = taps_[half_];
  alignas(64) double result[kNumChannels + kBlock];
  for (int j0 = 0; j0 < kNumChannels; j0 += kBlock) {
    alignas(64) double acc[kBlock];
#pragma omp simd
    for (int l = 0; l < kBlock; ++l) acc[l] = center * src[j0 + l];
    for (int k = 1; k <= half_; ++k) {
      const double w = taps_[half_ + k];
#pragma omp simd
      for (int l = 0; l < kBlock; ++l) acc[l] += w * (src[j0 + l + k] + src[j0 + l - k]);
    }
    for (int l = 0; l < kBlock; ++l) result[j0 + l] = acc[l];
  }
  for (int j = 0; j < kNumChannels; ++j) out[j] = result[j] * inv_norm_[j];
}

FactorPropagator::FactorPropagator(int fwhm) : fwhm_(fwhm), rise_(fwhm) {
  if (fwhm < 1 || fwhm > kNumChannels) {
    throw ConfigError("propagation FWHM out of range: " + std::to_string(fwhm));
  }
  for (int d = 0; d < fwhm; ++d) {
    rise_[d] = 0.5 - 0.5 * std::cos(std::numbers::pi * d / fwhm);
  }
}

ChannelVector FactorPropagator::Apply(const ChannelVector& local) const {
  // Outside the spectrum the padding never binds: factors are at most 1.
  constexpr int kPad = kNumChannels;
  constexpr int kBlock = 8;
  alignas(64) std::array<double, kNumChannels + 2 * kPad + kBlock> padded;
  padded.fill(2.0);
  std::copy(local.begin(), local.end(), padded.begin() + kPad);
  const double* src = padded.data() + kPad;
  alignas(64) double result[kNumChannels + kBlock];
  for (int j0 = 0; j0 < kNumChannels; j0 += kBlock) {
    alignas(64) double acc[kBlock];
#pragma omp simd
    for (int l = 0; l < kBlock; ++l) acc[l] = src[j0 + l];
    for (int d = 1; d < fwhm_; ++d) {
      const double r = rise_[d];
#pragma omp simd
      for (int l = 0; l < kBlock; ++l) {
        acc[l] = std::min(acc[l], std::min(src[j0 + l - d], src[j0 + l + d]) + r);
      }
    }
    for (int l = 0; l < kBlock; ++l) result[j0 + l] = acc[l];
  }
  ChannelVector out;
  for (int j = 0; j < kNumChannels; ++j) out[j] = std::clamp(result[j], 0.0, 1.0);
  return out;
}

GainPlanner::GainPlanner(PlattConfig config) : config_(std::move(config)) {
  config_.Validate();
  for (int w : config_.smoothing_widths) smoothers_.emplace_back(w);
  for (int f : config_.propagation_fwhm) propagators_.emplace_back(f);
}

LayerDecomposition GainPlanner::Decompose(const ChannelVector& levels) const {
  BandedSmoother::Padded padded{};
  std::copy(levels.begin(), levels.end(), padded.begin() + BandedSmoother::kPad);
  std::array<ChannelVector, 4> s;
  for (int i = 0; i < 4; ++i) smoothers_[i].Apply(padded, s[i]);
  LayerDecomposition layers;
  layers.base = s[3];
  for (int c = 0; c < kNumChannels; ++c) {
    layers.diff[0][c] = levels[c] - s[0][c];
    layers.diff[1][c] = s[0][c] - s[1][c];
    layers.diff[2][c] = s[1][c] - s[2][c];
    layers.diff[3][c] = s[2][c] - s[3][c];
  }
  return layers;
}

void GainPlanner::Run(const ChannelVector& levels, PlanTrace* trace, ChannelVector& gains) const {
  const LayerDecomposition layers = Decompose(levels);
  const ChannelVector mapped =
      MapBase(layers.base, config_.input_dr, config_.output_dr, config_.base_map);
  const double k = config_.expansion;
  ChannelVector out;
  for (int c = 0; c < kNumChannels; ++c) {
    out[c] = mapped[c] + layers.diff[0][c] + k * layers.diff[1][c];
  }
  if (trace) trace->output_before_diff3 = out;
  const ChannelVector f3 =
      propagators_[0].Apply(LocalFactors(out, layers.diff[2], config_.output_dr));
  for (int c = 0; c < kNumChannels; ++c) out[c] += f3[c] * layers.diff[2][c];
  const ChannelVector f4 =
      propagators_[1].Apply(LocalFactors(out, layers.diff[3], config_.output_dr));
  for (int c = 0; c < kNumChannels; ++c) out[c] += f4[c] * layers.diff[3][c];
  for (int c = 0; c < kNumChannels; ++c) gains[c] = out[c] - levels[c];
  if (trace) {
    trace->levels = levels;
    trace->layers = layers;
    trace->mapped_base = mapped;
    trace->factors3 = f3;
    trace->factors4 = f4;
    trace->output = out;
    trace->gains = gains;
  }
}

PlanTrace GainPlanner::Trace(const ChannelVector& levels) const {
  PlanTrace trace;
  ChannelVector gains;
  Run(levels, &trace, gains);
  return trace;
}

ChannelVector GainPlanner::Plan(const ChannelVector& levels) const {
  ChannelVector gains;
  Run(levels, nullptr, gains);
  return gains;
}

ChannelVector PlanGains(const ChannelVector& levels, const PlattConfig& config) {
  return GainPlanner(config).Plan(levels);
}

}  // namespace platt
