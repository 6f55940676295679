#ifndef PLATT_HEARING_SIM_H_
#define PLATT_HEARING_SIM_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "platt/envelope.h"

namespace platt {

// Frames x channels matrix of levels in dB, row-major.
struct FeatureMatrix {
  int frames = 0;
  int channels = 0;
  double frame_shift_ms = 10.0;
  std::vector<double> center_hz;
  std::vector<double> data;

  FeatureMatrix() = default;
  FeatureMatrix(int frames, int channels, double frame_shift_ms, std::vector<double> center_hz);

  double& at(int t, int c) { return data[static_cast<size_t>(t) * channels + c]; }
  double at(int t, int c) const { return data[static_cast<size_t>(t) * channels + c]; }
  // Copy of frames [first, first + count).
  FeatureMatrix Slice(int first, int count) const;
};

struct LogMelConfig {
  int num_bands = 36;
  double low_hz = 64.0;
  double high_hz = 16000.0;
  double window_ms = 25.0;
  double shift_ms = 10.0;
};

// Log Mel-spectrogram: Hann-windowed power spectra integrated by triangular
// bands equidistant on the Mel scale. A sinusoid of amplitude A centered in
// a band reads 20 log10(A) + dbspl_at_fullscale; white noise of variance v
// reads 10 log10(2 v B / (fs / 2)) + dbspl_at_fullscale for effective band
// width B.
class LogMelExtractor {
 public:
  LogMelExtractor(double sample_rate, const Calibration& calibration,
                  const LogMelConfig& config = {});

  // Throws NumericalError when the input is shorter than one window.
  FeatureMatrix Compute(std::span<const double> audio) const;
  int NumFrames(size_t samples) const;

  const std::vector<double>& center_hz() const { return center_hz_; }
  int window_length() const { return window_length_; }
  int shift() const { return shift_; }
  int fft_size() const { return fft_size_; }
  const std::vector<double>& window() const { return window_; }
  // Triangular weight of FFT bin k in band b.
  const std::vector<std::vector<double>>& weights() const { return weights_; }

 private:
  double sample_rate_;
  Calibration calibration_;
  LogMelConfig config_;
  int window_length_;
  int shift_;
  int fft_size_;
  std::vector<double> window_;
  double power_norm_;
  std::vector<double> center_hz_;
  std::vector<int> first_bin_;
  std::vector<std::vector<double>> weights_;  // per band, from first_bin_
};

struct HearingProfile {
  std::optional<double> limit_hz;  // channels above are replaced by the floor
  double uncertainty_db = 0.0;     // standard deviation of the level noise

  // "P-<limit>-<uncertainty>"; the limit is "none" or a frequency in Hz.
  std::string Name() const;
  // Throws ConfigError for malformed names.
  static HearingProfile Parse(const std::string& name);
  // Limits {8000, 4000, 2000, 1000} x uncertainties {1, 7, 14, 21}.
  static std::vector<HearingProfile> StandardGrid();

  bool operator==(const HearingProfile&) const = default;
};

// Normal-hearing threshold at each channel center.
std::vector<double> ThresholdFloor(std::span<const double> center_hz);

// Cell-wise max(cell, threshold[channel]).
FeatureMatrix ApplyThresholdFloor(const FeatureMatrix& features,
                                  std::span<const double> threshold);

// Adds i.i.d. N(0, uncertainty^2) noise to every cell (row-major draw
// order from a 64-bit Mersenne Twister seeded with `seed`), then sets every
// channel centered above the limit to its floor value.
FeatureMatrix ApplyProfile(const FeatureMatrix& features, const HearingProfile& profile,
                           std::span<const double> floor, uint64_t seed);

// Floor, then profile.
FeatureMatrix SimulateListener(const FeatureMatrix& features, const HearingProfile& profile,
                               std::span<const double> floor, uint64_t seed);

// Binary layout, little endian: "PLATTFM1", uint32 frames, uint32 channels,
// float64 frame shift (ms), float64 center frequency per channel, then
// float64 cells row-major.
void WriteFeatureBinary(const std::string& path, const FeatureMatrix& features);
FeatureMatrix ReadFeatureBinary(const std::string& path);
// Header "time_ms,<hz>,..." then one row per frame.
void WriteFeatureCsv(std::ostream& out, const FeatureMatrix& features);

}  // namespace platt

#endif  // PLATT_HEARING_SIM_H_
