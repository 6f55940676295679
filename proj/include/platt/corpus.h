#ifndef PLATT_CORPUS_H_
#define PLATT_CORPUS_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "platt/envelope.h"

namespace platt {

enum class MaskerKind { kStationary, kFluctuating };
std::string MaskerName(MaskerKind kind);
MaskerKind ParseMasker(const std::string& name);

struct CorpusConfig {
  int num_words = 10;
  double sample_rate = kDefaultSampleRate;
  double word_ms = 500.0;
  int masker_length = 1 << 22;  // samples; maskers are read circularly
  // Fluctuating masker: on segments uniform in [min, max], gaps at most
  // max_gap_ms.
  double min_on_ms = 60.0;
  double max_on_ms = 400.0;
  double max_gap_ms = 250.0;
};

// One articulatory segment of a word.
struct WordSegment {
  double duration_ms = 0.0;
  bool voiced = true;
  std::array<double, 4> formant_hz{};    // voiced resonances
  std::array<double, 4> bandwidth_hz{};
  double frication_hz = 0.0;             // center of the noise band if unvoiced
  double frication_bw_hz = 0.0;
  double gain_db = 0.0;
};

struct WordTemplate {
  std::vector<WordSegment> segments;
  double f0_start_hz = 110.0;
  double f0_end_hz = 95.0;
};

// Synthetic vocabulary with two maskers.
struct SyntheticCorpus {
  CorpusConfig config;
  uint64_t seed = 0;
  std::vector<WordTemplate> words;
  // Unit-RMS maskers; the stationary one follows the vocabulary's long-term
  // spectrum, the fluctuating one is the same spectrum split into three
  // bands with independent on/off envelopes.
  std::vector<double> stationary_masker;
  std::vector<double> fluctuating_masker;
  std::array<double, 4> band_edges_hz{};
  // Band envelopes at 1 ms resolution, values in [0, 1].
  std::array<std::vector<double>, 3> fluctuating_envelopes;

  int word_samples() const;
  // A spoken instance of `word`: speaker parameters (F0, vocal-tract scale,
  // formant detail, level) perturbed deterministically by `token_seed`.
  // Unit RMS before the level perturbation.
  std::vector<double> RenderToken(int word, uint64_t token_seed) const;
  const std::vector<double>& masker(MaskerKind kind) const;
};

SyntheticCorpus GenerateCorpus(const CorpusConfig& config, uint64_t seed);

// Token slots of a mixture stream: each slot is slot_ms long and holds one
// token starting word_offset_ms into it.
struct StreamLayout {
  double slot_ms = 520.0;
  double word_offset_ms = 10.0;
  int tokens = 100;
};

struct StreamSpec {
  MaskerKind masker = MaskerKind::kStationary;
  double noise_dbspl = 70.0;
  double snr_db = 0.0;
  uint64_t seed = 0;  // token identities, speaker variation and masker offset
};

struct MixtureStream {
  std::vector<double> audio;
  std::vector<int> labels;  // word per slot
  int slot_samples = 0;
};

// Tokens cycle through the vocabulary (slot s holds word s mod W). Speech
// RMS is set to noise_dbspl + snr_db over each word, masker RMS to
// noise_dbspl.
MixtureStream BuildStream(const SyntheticCorpus& corpus, const StreamLayout& layout,
                          const StreamSpec& spec, const Calibration& calibration);

// splitmix64 step; used to derive independent seeds from tuples.
uint64_t MixSeed(uint64_t a, uint64_t b);

}  // namespace platt

#endif  // PLATT_CORPUS_H_
