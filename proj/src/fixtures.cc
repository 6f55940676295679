#include "platt/fixtures.h"

#include <cmath>
#include <numbers>

#include "platt/corpus.h"
#include "platt/kernels.h"

namespace platt {

std::vector<double> ToneSignal(std::span<const double> frequencies_hz, double level_dbspl,
                               double duration_s, double sample_rate,
                               const Calibration& calibration) {
  const double amplitude = std::pow(10.0, (level_dbspl - calibration.dbspl_at_fullscale) / 20.0);
  std::vector<double> out(static_cast<size_t>(std::lround(duration_s * sample_rate)), 0.0);
  for (double f : frequencies_hz) {
    const double w = 2.0 * std::numbers::pi * f / sample_rate;
    for (size_t n = 0; n < out.size(); ++n) out[n] += amplitude * std::sin(w * n);
  }
  return out;
}

std::vector<double> TwoToneFixture(double sample_rate, const Calibration& calibration) {
  const double tones[] = {500.0, 2000.0};
  return ToneSignal(tones, 85.0, 0.2, sample_rate, calibration);
}

std::vector<double> NoisyFixture(double sample_rate, const Calibration& calibration) {
  CorpusConfig config;
  config.sample_rate = sample_rate;
  config.masker_length = 1 << 18;
  const SyntheticCorpus corpus = GenerateCorpus(config, 2024);
  StreamLayout layout;
  layout.tokens = config.num_words;
  const StreamSpec spec{MaskerKind::kStationary, 65.0, 0.0, 7};
  return BuildStream(corpus, layout, spec, calibration).audio;
}

ChannelVector FinalEnvelope(std::span<const double> audio, double sample_rate,
                            const Calibration& calibration) {
  const FilterbankSpec spec = DesignFilterbank(sample_rate);
  const Filterbank filterbank(spec);
  EnvelopeTracker tracker(spec, calibration);
  FilterState state;
  BandBlock bands;
  filterbank.AnalyzeTracked(audio, state, tracker.rule(), tracker.mutable_state(), bands);
  return tracker.Levels();
}

std::vector<double> MakeFixture(const std::string& kind, double sample_rate,
                                const Calibration& calibration) {
  if (kind == "tone") {
    const double tone[] = {1000.0};
    return ToneSignal(tone, 70.0, 1.0, sample_rate, calibration);
  }
  if (kind == "two-tone") return TwoToneFixture(sample_rate, calibration);
  if (kind == "noisy") return NoisyFixture(sample_rate, calibration);
  throw ConfigError("unknown fixture '" + kind + "' (tone, two-tone or noisy)");
}

}  // namespace platt
