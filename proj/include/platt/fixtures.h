#ifndef PLATT_FIXTURES_H_
#define PLATT_FIXTURES_H_

#include <span>
#include <string>
#include <vector>

#include "platt/envelope.h"

namespace platt {

// Sum of sinusoids, each with the given level, starting in sine phase.
std::vector<double> ToneSignal(std::span<const double> frequencies_hz, double level_dbspl,
                               double duration_s, double sample_rate,
                               const Calibration& calibration);

// 500 Hz and 2000 Hz tones at 85 dB SPL each, 200 ms.
std::vector<double> TwoToneFixture(double sample_rate, const Calibration& calibration);

// Ten synthetic words in the stationary masker at 0 dB SNR, 65 dB SPL noise
// level, 5.2 s. Deterministic.
std::vector<double> NoisyFixture(double sample_rate, const Calibration& calibration);

// Envelope levels at the end of `audio`, from the engine's analysis and
// envelope stages.
ChannelVector FinalEnvelope(std::span<const double> audio, double sample_rate,
                            const Calibration& calibration);

// "tone" (1 kHz at 70 dB SPL, 1 s), "two-tone" or "noisy"; throws
// ConfigError otherwise.
std::vector<double> MakeFixture(const std::string& kind, double sample_rate,
                                const Calibration& calibration);

}  // namespace platt

#endif  // PLATT_FIXTURES_H_
