#include "platt/hearing_sim.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "platt/fft.h"
#include "platt/thresholds.h"

namespace platt {
namespace {

double MelOf(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double HzOfMel(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::string FormatNumber(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

}  // namespace

FeatureMatrix::FeatureMatrix(int frames, int channels, double frame_shift_ms,
                             std::vector<double> center_hz)
    : frames(frames),
      channels(channels),
      frame_shift_ms(frame_shift_ms),
      center_hz(std::move(center_hz)),
      data(static_cast<size_t>(frames) * channels, 0.0) {}

FeatureMatrix FeatureMatrix::Slice(int first, int count) const {
  if (first < 0 || count < 0 || first + count > frames) {
    throw NumericalError("feature slice out of range");
  }
  FeatureMatrix out(count, channels, frame_shift_ms, center_hz);
  std::copy_n(data.begin() + static_cast<size_t>(first) * channels,
              static_cast<size_t>(count) * channels, out.data.begin());
  return out;
}

LogMelExtractor::LogMelExtractor(double sample_rate, const Calibration& calibration,
                                 const LogMelConfig& config)
    : sample_rate_(sample_rate), calibration_(calibration), config_(config) {
  if (config.num_bands < 1) throw ConfigError("log Mel band count must be positive");
  if (!(config.low_hz >= 0.0 && config.low_hz < config.high_hz &&
        config.high_hz <= sample_rate / 2.0)) {
    throw ConfigError("log Mel band edges must satisfy 0 <= low < high <= fs/2");
  }
  window_length_ = static_cast<int>(std::lround(config.window_ms * sample_rate / 1000.0));
  shift_ = static_cast<int>(std::lround(config.shift_ms * sample_rate / 1000.0));
  if (window_length_ < 2 || shift_ < 1) throw ConfigError("log Mel window too short");
  fft_size_ = static_cast<int>(std::bit_ceil(static_cast<unsigned>(window_length_)));
  // Periodic Hann window.
  window_.resize(window_length_);
  double sum_sq = 0.0;
  for (int n = 0; n < window_length_; ++n) {
    window_[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / window_length_);
    sum_sq += window_[n] * window_[n];
  }
  // One-sided power per bin: summed over bins it equals the signal variance.
  power_norm_ = 2.0 / (fft_size_ * sum_sq);

  const int bands = config.num_bands;
  const double mel_lo = MelOf(config.low_hz);
  const double mel_hi = MelOf(config.high_hz);
  std::vector<double> edges(bands + 2);
  for (int i = 0; i < bands + 2; ++i) {
    edges[i] = HzOfMel(mel_lo + (mel_hi - mel_lo) * i / (bands + 1));
  }
  const double bin_hz = sample_rate / fft_size_;
  const int num_bins = fft_size_ / 2 + 1;
  center_hz_.resize(bands);
  first_bin_.resize(bands);
  weights_.resize(bands);
  for (int b = 0; b < bands; ++b) {
    const double lo = edges[b], mid = edges[b + 1], hi = edges[b + 2];
    center_hz_[b] = mid;
    const int k0 = std::max(0, static_cast<int>(std::ceil(lo / bin_hz)));
    const int k1 = std::min(num_bins - 1, static_cast<int>(std::floor(hi / bin_hz)));
    first_bin_[b] = k0;
    for (int k = k0; k <= k1; ++k) {
      const double f = k * bin_hz;
      const double w = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
      weights_[b].push_back(std::max(0.0, w));
    }
    if (weights_[b].empty()) {
      // Band narrower than a bin: take the nearest bin.
      first_bin_[b] = std::min(num_bins - 1, static_cast<int>(std::lround(mid / bin_hz)));
      weights_[b].push_back(1.0);
    }
  }
}

int LogMelExtractor::NumFrames(size_t samples) const {
  if (samples < static_cast<size_t>(window_length_)) return 0;
  return static_cast<int>((samples - window_length_) / shift_) + 1;
}

FeatureMatrix LogMelExtractor::Compute(std::span<const double> audio) const {
  const int frames = NumFrames(audio.size());
  if (frames == 0) {
    throw NumericalError("audio of " + std::to_string(audio.size()) +
                         " samples is shorter than one analysis window (" +
                         std::to_string(window_length_) + ")");
  }
  FeatureMatrix out(frames, config_.num_bands, config_.shift_ms, center_hz_);
  RealFft fft(fft_size_);
  std::vector<double> frame(fft_size_, 0.0);
  std::vector<std::complex<double>> spectrum(fft.bins());
  std::vector<double> power(fft.bins());
  // Keeps silent bands finite; far below any threshold.
  constexpr double kTiny = 1e-30;
  for (int t = 0; t < frames; ++t) {
    const double* x = audio.data() + static_cast<size_t>(t) * shift_;
    for (int n = 0; n < window_length_; ++n) frame[n] = x[n] * window_[n];
    fft.Forward(frame, spectrum);
    for (int k = 0; k < fft.bins(); ++k) power[k] = power_norm_ * std::norm(spectrum[k]);
    for (int b = 0; b < config_.num_bands; ++b) {
      double p = 0.0;
      const std::vector<double>& w = weights_[b];
      for (size_t i = 0; i < w.size(); ++i) p += w[i] * power[first_bin_[b] + i];
      out.at(t, b) = 10.0 * std::log10(2.0 * p + kTiny) + calibration_.dbspl_at_fullscale;
    }
  }
  return out;
}

std::string HearingProfile::Name() const {
  return "P-" + (limit_hz ? FormatNumber(*limit_hz) : std::string("none")) + "-" +
         FormatNumber(uncertainty_db);
}

HearingProfile HearingProfile::Parse(const std::string& name) {
  const auto fail = [&]() {
    return ConfigError("invalid profile name '" + name +
                       "' (expected P-<limit Hz|none>-<uncertainty dB>)");
  };
  if (name.size() < 5 || name.compare(0, 2, "P-") != 0) throw fail();
  const size_t dash = name.find('-', 2);
  if (dash == std::string::npos) throw fail();
  const std::string limit = name.substr(2, dash - 2);
  const std::string sigma = name.substr(dash + 1);
  const auto parse = [&](const std::string& text) {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || end != text.data() + text.size() || text.empty()) throw fail();
    return v;
  };
  HearingProfile profile;
  if (limit != "none" && limit != "inf") {
    profile.limit_hz = parse(limit);
    if (!(*profile.limit_hz > 0.0)) throw fail();
  }
  profile.uncertainty_db = parse(sigma);
  if (!(profile.uncertainty_db >= 0.0) || !std::isfinite(profile.uncertainty_db)) throw fail();
  return profile;
}

std::vector<HearingProfile> HearingProfile::StandardGrid() {
  std::vector<HearingProfile> grid;
  for (double limit : {8000.0, 4000.0, 2000.0, 1000.0}) {
    for (double sigma : {1.0, 7.0, 14.0, 21.0}) grid.push_back({limit, sigma});
  }
  return grid;
}

std::vector<double> ThresholdFloor(std::span<const double> center_hz) {
  return ThresholdTable::Iso226().At(center_hz);
}

FeatureMatrix ApplyThresholdFloor(const FeatureMatrix& features,
                                  std::span<const double> threshold) {
  if (static_cast<int>(threshold.size()) != features.channels) {
    throw NumericalError("threshold vector does not match the channel count");
  }
  FeatureMatrix out = features;
  for (int t = 0; t < out.frames; ++t) {
    for (int c = 0; c < out.channels; ++c) out.at(t, c) = std::max(out.at(t, c), threshold[c]);
  }
  return out;
}

FeatureMatrix ApplyProfile(const FeatureMatrix& features, const HearingProfile& profile,
                           std::span<const double> floor, uint64_t seed) {
  if (static_cast<int>(floor.size()) != features.channels) {
    throw NumericalError("floor vector does not match the channel count");
  }
  FeatureMatrix out = features;
  if (profile.uncertainty_db > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, profile.uncertainty_db);
    for (double& cell : out.data) cell += noise(rng);
  }
  if (profile.limit_hz) {
    for (int c = 0; c < out.channels; ++c) {
      if (out.center_hz[c] <= *profile.limit_hz) continue;
      for (int t = 0; t < out.frames; ++t) out.at(t, c) = floor[c];
    }
  }
  return out;
}

FeatureMatrix SimulateListener(const FeatureMatrix& features, const HearingProfile& profile,
                               std::span<const double> floor, uint64_t seed) {
  return ApplyProfile(ApplyThresholdFloor(features, floor), profile, floor, seed);
}

void WriteFeatureBinary(const std::string& path, const FeatureMatrix& features) {
  static_assert(std::endian::native == std::endian::little);
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot create " + path);
  const uint32_t frames = static_cast<uint32_t>(features.frames);
  const uint32_t channels = static_cast<uint32_t>(features.channels);
  file.write("PLATTFM1", 8);
  file.write(reinterpret_cast<const char*>(&frames), 4);
  file.write(reinterpret_cast<const char*>(&channels), 4);
  file.write(reinterpret_cast<const char*>(&features.frame_shift_ms), 8);
  file.write(reinterpret_cast<const char*>(features.center_hz.data()), 8 * channels);
  file.write(reinterpret_cast<const char*>(features.data.data()),
             static_cast<std::streamsize>(8 * features.data.size()));
  if (!file) throw IoError("write failed: " + path);
}

FeatureMatrix ReadFeatureBinary(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open " + path);
  char magic[8];
  uint32_t frames = 0, channels = 0;
  double shift = 0.0;
  file.read(magic, 8);
  file.read(reinterpret_cast<char*>(&frames), 4);
  file.read(reinterpret_cast<char*>(&channels), 4);
  file.read(reinterpret_cast<char*>(&shift), 8);
  if (!file || std::memcmp(magic, "PLATTFM1", 8) != 0) {
    throw IoError(path + ": not a feature matrix file");
  }
  std::vector<double> hz(channels);
  file.read(reinterpret_cast<char*>(hz.data()), 8 * channels);
  FeatureMatrix out(static_cast<int>(frames), static_cast<int>(channels), shift, std::move(hz));
  file.read(reinterpret_cast<char*>(out.data.data()),
            static_cast<std::streamsize>(8 * out.data.size()));
  if (!file) throw IoError(path + ": truncated feature matrix");
  return out;
}

void WriteFeatureCsv(std::ostream& out, const FeatureMatrix& features) {
  out << "time_ms";
  for (double hz : features.center_hz) out << ',' << hz;
  out << '\n';
  for (int t = 0; t < features.frames; ++t) {
    out << t * features.frame_shift_ms;
    for (int c = 0; c < features.channels; ++c) out << ',' << features.at(t, c);
    out << '\n';
  }
}

}  // namespace platt
