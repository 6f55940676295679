#ifndef PLATT_GAINPLAN_H_
#define PLATT_GAINPLAN_H_

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "platt/common.h"
#include "platt/filterbank.h"

namespace platt {

// Per-channel level limits in dB SPL.
struct DynamicRange {
  ChannelVector lower{};
  ChannelVector upper{};

  static DynamicRange Uniform(double lower_db, double upper_db);
  // 105 dB SPL upper limit; lower limit 25 dB SPL from 500 Hz to 4 kHz and
  // 30 dB SPL below 250 Hz and above 8 kHz, log-frequency interpolated.
  static DynamicRange DefaultInput(const FilterbankSpec& spec);

  // Throws ConfigError unless lower < upper everywhere.
  void Validate() const;
};

enum class BaseMap { kLinear, kIdentity };

struct PlattConfig {
  double expansion = 1.0;  // k, applied to difference 2
  DynamicRange input_dr;
  DynamicRange output_dr;
  BaseMap base_map = BaseMap::kIdentity;
  std::array<int, 4> smoothing_widths = {8, 16, 32, 64};
  std::array<int, 2> propagation_fwhm = {6, 12};

  // Matched input and output ranges with identity base mapping.
  static PlattConfig Default(const FilterbankSpec& spec);
  void Validate() const;
};

struct LayerDecomposition {
  ChannelVector base{};
  std::array<ChannelVector, 4> diff{};

  ChannelVector Reconstruct() const;
};

// Unit-area Hanning kernel of `width` samples (nonzero for |k| < width/2),
// truncated and renormalized at the spectrum edges.
ChannelVector Smooth(const ChannelVector& levels, int width);
Eigen::MatrixXd SmoothingMatrix(int width, int size = kNumChannels);

// Differences are successive residuals of the input smoothed independently
// at each width: diff1 = x - s1, diff2 = s1 - s2, ..., base = s4.
LayerDecomposition Decompose(const ChannelVector& levels, const PlattConfig& config);

ChannelVector MapBase(const ChannelVector& base, const DynamicRange& input_dr,
                      const DynamicRange& output_dr, BaseMap mode);

// Largest alpha in [0, 1] per channel keeping current + alpha * diff on the
// near side of the limit that diff moves toward.
ChannelVector LocalFactors(const ChannelVector& current, const ChannelVector& diff,
                           const DynamicRange& range);

// final[j] = min(local[j], min_i local[i] + 1 - w(j - i)) with
// w(d) = 0.5 + 0.5 cos(pi d / fwhm) for |d| < fwhm and 0 elsewhere.
// Never exceeds `local`; a second pass never raises a factor.
ChannelVector PropagateFactors(const ChannelVector& local, int fwhm);

ChannelVector ConditionalFactors(const ChannelVector& current, const ChannelVector& diff,
                                 const DynamicRange& range, int fwhm);

// Every intermediate of one planning step, for introspection dumps.
struct PlanTrace {
  ChannelVector levels{};
  LayerDecomposition layers;
  ChannelVector mapped_base{};
  ChannelVector output_before_diff3{};
  ChannelVector factors3{};
  ChannelVector factors4{};
  ChannelVector output{};
  ChannelVector gains{};
};

// Separable form of SmoothingMatrix: raw kernel taps plus per-row
// renormalization, applied by shifting over a zero-padded spectrum.
class BandedSmoother {
 public:
  // Zero padding on each side of the spectrum; covers widths up to 2 * kPad.
  static constexpr int kPad = 64;
  // Eight spare entries let blocked loops run past the last channel.
  using Padded = std::array<double, kNumChannels + 2 * kPad + 8>;

  explicit BandedSmoother(int width);
  void Apply(const Padded& x, ChannelVector& out) const;

 private:
  int half_;                  // taps at offsets -half_..half_
  std::vector<double> taps_;
  ChannelVector inv_norm_{};
};

// Min-plus propagation with a precomputed profile; same result as
// PropagateFactors.
class FactorPropagator {
 public:
  explicit FactorPropagator(int fwhm);
  ChannelVector Apply(const ChannelVector& local) const;

 private:
  int fwhm_;
  std::vector<double> rise_;  // 1 - w(d), d = 0..fwhm-1
};

// Frame-to-gain planner with the smoothing operators precomputed. Pure and
// thread-compatible: Plan is const.
class GainPlanner {
 public:
  explicit GainPlanner(PlattConfig config);

  const PlattConfig& config() const { return config_; }

  ChannelVector Plan(const ChannelVector& levels) const;
  PlanTrace Trace(const ChannelVector& levels) const;
  LayerDecomposition Decompose(const ChannelVector& levels) const;

 private:
  // Fills `trace` when non-null.
  void Run(const ChannelVector& levels, PlanTrace* trace, ChannelVector& gains) const;

  PlattConfig config_;
  std::vector<BandedSmoother> smoothers_;
  std::vector<FactorPropagator> propagators_;
};

ChannelVector PlanGains(const ChannelVector& levels, const PlattConfig& config);

}  // namespace platt

#endif  // PLATT_GAINPLAN_H_
