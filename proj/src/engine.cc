#include "platt/engine.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace platt {

EngineConfig EngineConfig::Default(double sample_rate) {
  EngineConfig config;
  config.sample_rate = sample_rate;
  config.platt = PlattConfig::Default(DesignFilterbank(sample_rate));
  return config;
}

int EngineConfig::samples_per_frame() const {
  const double spf = sample_rate / 1000.0;
  if (!(spf >= 1.0) || spf != std::floor(spf)) {
    throw ConfigError("sample rate " + std::to_string(sample_rate) +
                      " Hz is not a whole number of samples per millisecond");
  }
  return static_cast<int>(spf);
}

void EngineConfig::Validate() const {
  samples_per_frame();
  if (!std::isfinite(calibration.dbspl_at_fullscale)) {
    throw ConfigError("calibration must be finite");
  }
  if (!(envelope.hold_ms >= 0.0) || !(envelope.decay_db_per_ms > 0.0)) {
    throw ConfigError("envelope hold must be >= 0 and decay > 0");
  }
  platt.Validate();
}

Engine::Engine(const EngineConfig& config)
    : Engine(config, std::make_shared<const Filterbank>(DesignFilterbank(config.sample_rate))) {}

Engine::Engine(const EngineConfig& config, std::shared_ptr<const Filterbank> filterbank)
    : config_(config),
      filterbank_(std::move(filterbank)),
      planner_(config.platt),
      tracker_(filterbank_->spec(), config.calibration, config.envelope),
      samples_per_frame_(config.samples_per_frame()) {
  config_.Validate();
  if (filterbank_->spec().sample_rate() != config_.sample_rate) {
    throw ConfigError("filterbank designed for a different sample rate");
  }
  targets_.fill(0.0);
}

void Engine::Reset() {
  tracker_ = EnvelopeTracker(filterbank_->spec(), config_.calibration, config_.envelope);
  state_ = FilterState();
  targets_.fill(0.0);
  frame_pos_ = 0;
  frames_completed_ = 0;
}

void Engine::Process(std::span<const double> in, std::span<double> out) {
  if (out.size() != in.size()) throw ConfigError("output size must match input size");
  size_t pos = 0;
  while (pos < in.size()) {
    const size_t n =
        std::min<size_t>(samples_per_frame_ - frame_pos_, in.size() - pos);
    // Copy first so that in-place processing reads the input.
    scratch_.assign(in.begin() + pos, in.begin() + pos + n);
    filterbank_->AnalyzeTracked(scratch_, state_, tracker_.rule(), tracker_.mutable_state(),
                                bands_);
    filterbank_->Synthesize(bands_, targets_, state_, out.subspan(pos, n));
    frame_pos_ += static_cast<int>(n);
    pos += n;
    if (frame_pos_ == samples_per_frame_) FinishFrame();
  }
}

std::vector<double> Engine::Process(std::span<const double> in) {
  std::vector<double> out(in.size());
  Process(in, out);
  return out;
}

void Engine::FinishFrame() {
  frame_pos_ = 0;
  ++frames_completed_;
  EnvelopeFrame frame;
  frame.timestamp_ms = static_cast<double>(frames_completed_);
  frame.levels = tracker_.Levels();
  if (observer_) {
    const PlanTrace trace = planner_.Trace(frame.levels);
    targets_ = trace.gains;
    observer_(frame, trace);
  } else {
    targets_ = planner_.Plan(frame.levels);
  }
}

EngineBank::EngineBank(const EngineConfig& base, std::vector<PlattConfig> variants,
                       std::shared_ptr<const Filterbank> filterbank)
    : base_(base),
      filterbank_(filterbank ? std::move(filterbank)
                             : std::make_shared<const Filterbank>(
                                   DesignFilterbank(base.sample_rate))),
      tracker_(filterbank_->spec(), base.calibration, base.envelope),
      samples_per_frame_(base.samples_per_frame()) {
  base_.Validate();
  if (filterbank_->spec().sample_rate() != base_.sample_rate) {
    throw ConfigError("filterbank designed for a different sample rate");
  }
  if (variants.empty()) throw ConfigError("an engine bank needs at least one variant");
  for (PlattConfig& v : variants) planners_.emplace_back(std::move(v));
  synthesis_states_.resize(planners_.size());
  targets_.assign(planners_.size(), Filled(0.0));
}

void EngineBank::Process(std::span<const double> in, std::span<const std::span<double>> out) {
  if (out.size() != planners_.size()) throw ConfigError("one output per variant required");
  for (const std::span<double>& o : out) {
    if (o.size() != in.size()) throw ConfigError("output size must match input size");
  }
  const int variants = size();
  size_t pos = 0;
  while (pos < in.size()) {
    const size_t n = std::min<size_t>(samples_per_frame_ - frame_pos_, in.size() - pos);
    scratch_.assign(in.begin() + pos, in.begin() + pos + n);
    filterbank_->AnalyzeTracked(scratch_, analysis_state_, tracker_.rule(),
                                tracker_.mutable_state(), bands_);
    for (int v = 0; v < variants; ++v) {
      filterbank_->Synthesize(bands_, targets_[v], synthesis_states_[v], out[v].subspan(pos, n));
    }
    frame_pos_ += static_cast<int>(n);
    pos += n;
    if (frame_pos_ == samples_per_frame_) {
      frame_pos_ = 0;
      const ChannelVector levels = tracker_.Levels();
      for (int v = 0; v < variants; ++v) targets_[v] = planners_[v].Plan(levels);
    }
  }
}

std::vector<std::vector<double>> EngineBank::Process(std::span<const double> in) {
  std::vector<std::vector<double>> out(planners_.size(), std::vector<double>(in.size()));
  std::vector<std::span<double>> views(out.begin(), out.end());
  Process(in, views);
  return out;
}

std::vector<double> ProcessStream(std::span<const double> audio, double input_rate,
                                  const EngineConfig& config) {
  if (input_rate != config.sample_rate) {
    throw ConfigError("input sample rate " + std::to_string(input_rate) +
                      " Hz does not match the configured " +
                      std::to_string(config.sample_rate) + " Hz");
  }
  Engine engine(config);
  return engine.Process(audio);
}

std::vector<ChannelLatency> MeasureLatency(const EngineConfig& config) {
  const Filterbank filterbank(DesignFilterbank(config.sample_rate));
  const int length = static_cast<int>(std::ceil(0.05 * config.sample_rate));
  std::vector<double> impulse(length, 0.0);
  impulse[0] = 1.0;
  FilterState state;
  BandBlock bands;
  filterbank.Analyze(impulse, state, bands);
  std::vector<ChannelLatency> latency(filterbank.num_channels());
  for (int c = 0; c < filterbank.num_channels(); ++c) {
    int best = 0;
    double best_power = -1.0;
    for (int n = 0; n < length; ++n) {
      const double p = bands.Re(n, c) * bands.Re(n, c) + bands.Im(n, c) * bands.Im(n, c);
      if (p > best_power) {
        best_power = p;
        best = n;
      }
    }
    latency[c].center_hz = filterbank.spec().channel(c).center_hz;
    latency[c].delay_ms = 1000.0 * best / config.sample_rate;
  }
  return latency;
}

double LatencyAt(const std::vector<ChannelLatency>& latency, double hz) {
  if (hz <= latency.front().center_hz) return latency.front().delay_ms;
  if (hz >= latency.back().center_hz) return latency.back().delay_ms;
  size_t i = 1;
  while (latency[i].center_hz < hz) ++i;
  const ChannelLatency& a = latency[i - 1];
  const ChannelLatency& b = latency[i];
  const double t = std::log(hz / a.center_hz) / std::log(b.center_hz / a.center_hz);
  return a.delay_ms + t * (b.delay_ms - a.delay_ms);
}

}  // namespace platt
