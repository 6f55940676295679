#ifndef PLATT_ENGINE_H_
#define PLATT_ENGINE_H_

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "platt/envelope.h"
#include "platt/filterbank.h"
#include "platt/gainplan.h"
#include "platt/kernels.h"

namespace platt {

struct EngineConfig {
  double sample_rate = kDefaultSampleRate;
  Calibration calibration;
  EnvelopeParams envelope;
  PlattConfig platt;

  // Defaults for the given rate: matched input and output ranges, identity
  // base mapping, k = 1.
  static EngineConfig Default(double sample_rate = kDefaultSampleRate);

  // sample_rate / 1000; throws ConfigError unless that is an integer.
  int samples_per_frame() const;
  void Validate() const;
};

// One streaming PLATT instance. Gains planned from the envelope at the end
// of frame t are the slew targets throughout frame t + 1; the audio path
// itself is not delayed. Output is independent of how the input is split
// into Process calls.
class Engine {
 public:
  explicit Engine(const EngineConfig& config);
  Engine(const EngineConfig& config, std::shared_ptr<const Filterbank> filterbank);

  // Called once per completed frame with the envelope and the gains planned
  // from it.
  using FrameObserver = std::function<void(const EnvelopeFrame&, const PlanTrace&)>;
  void set_frame_observer(FrameObserver observer) { observer_ = std::move(observer); }

  // `out` must have the size of `in`; in-place operation is allowed.
  void Process(std::span<const double> in, std::span<double> out);
  std::vector<double> Process(std::span<const double> in);
  void Reset();

  const EngineConfig& config() const { return config_; }
  const Filterbank& filterbank() const { return *filterbank_; }
  const ChannelVector& target_gains() const { return targets_; }
  long frames_completed() const { return frames_completed_; }

 private:
  void FinishFrame();

  EngineConfig config_;
  std::shared_ptr<const Filterbank> filterbank_;
  GainPlanner planner_;
  EnvelopeTracker tracker_;
  FilterState state_;
  BandBlock bands_;
  ChannelVector targets_{};
  int samples_per_frame_;
  int frame_pos_ = 0;
  long frames_completed_ = 0;
  FrameObserver observer_;
  std::vector<double> scratch_;
};

// Several PLATT configurations sharing one analysis and one envelope, which
// do not depend on the planning parameters. Each output equals that of a
// separate Engine built from `base` with the variant's planning config.
class EngineBank {
 public:
  EngineBank(const EngineConfig& base, std::vector<PlattConfig> variants,
             std::shared_ptr<const Filterbank> filterbank = nullptr);

  int size() const { return static_cast<int>(planners_.size()); }
  // One output per variant, each of the input's size.
  void Process(std::span<const double> in, std::span<const std::span<double>> out);
  std::vector<std::vector<double>> Process(std::span<const double> in);

 private:
  EngineConfig base_;
  std::shared_ptr<const Filterbank> filterbank_;
  std::vector<GainPlanner> planners_;
  EnvelopeTracker tracker_;
  FilterState analysis_state_;
  std::vector<FilterState> synthesis_states_;
  std::vector<ChannelVector> targets_;
  BandBlock bands_;
  int samples_per_frame_;
  int frame_pos_ = 0;
  std::vector<double> scratch_;
};

// Processes a whole signal recorded at `input_rate`. Throws ConfigError if
// it differs from the configured rate.
std::vector<double> ProcessStream(std::span<const double> audio, double input_rate,
                                  const EngineConfig& config);

struct ChannelLatency {
  double center_hz = 0.0;
  double delay_ms = 0.0;
};

// Envelope-peak delay of each channel's end-to-end impulse response.
std::vector<ChannelLatency> MeasureLatency(const EngineConfig& config);

// Delay at `hz`, interpolated between channels in log frequency.
double LatencyAt(const std::vector<ChannelLatency>& latency, double hz);

}  // namespace platt

#endif  // PLATT_ENGINE_H_
