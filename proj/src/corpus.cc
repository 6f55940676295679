#include "platt/corpus.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "platt/fft.h"

namespace platt {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Vowel-like (F1, F2, F3) targets in Hz.
constexpr std::array<std::array<double, 3>, 10> kVowels = {{
    {280, 2250, 2900},
    {400, 2000, 2600},
    {550, 1800, 2500},
    {750, 1250, 2500},
    {600, 900, 2450},
    {430, 850, 2400},
    {320, 800, 2250},
    {280, 1700, 2150},
    {400, 1500, 2200},
    {500, 1450, 2450},
}};
constexpr std::array<double, 4> kFricatives = {2500, 3500, 4500, 6500};
constexpr std::array<double, 4> kBandwidths = {60, 90, 120, 180};

// Second-order resonator with unity gain at DC.
class Resonator {
 public:
  void Set(double hz, double bw, double fs) {
    const double r = std::exp(-std::numbers::pi * bw / fs);
    b_ = 2.0 * r * std::cos(kTwoPi * hz / fs);
    c_ = -r * r;
    a_ = 1.0 - b_ - c_;
  }
  double operator()(double x) {
    double y = a_ * x + b_ * y1_ + c_ * y2_;
    // Decaying ringing would otherwise reach subnormal numbers.
    if (std::abs(y) < 1e-150) y = 0.0;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double a_ = 1.0, b_ = 0.0, c_ = 0.0, y1_ = 0.0, y2_ = 0.0;
};

double Rms(std::span<const double> x) {
  double sum = 0.0;
  for (double v : x) sum += v * v;
  return x.empty() ? 0.0 : std::sqrt(sum / x.size());
}

void NormalizeRms(std::vector<double>& x) {
  const double rms = Rms(x);
  if (rms > 0.0) {
    for (double& v : x) v /= rms;
  }
}

double Uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

WordSegment VowelSegment(std::mt19937_64& rng, int vowel, double duration_ms) {
  WordSegment seg;
  seg.duration_ms = duration_ms;
  seg.voiced = true;
  for (int i = 0; i < 3; ++i) seg.formant_hz[i] = kVowels[vowel][i] * Uniform(rng, 0.93, 1.07);
  seg.formant_hz[3] = 3500.0 * Uniform(rng, 0.95, 1.05);
  seg.bandwidth_hz = kBandwidths;
  return seg;
}

WordSegment FricativeSegment(std::mt19937_64& rng, double duration_ms) {
  WordSegment seg;
  seg.duration_ms = duration_ms;
  seg.voiced = false;
  seg.frication_hz = kFricatives[rng() % kFricatives.size()] * Uniform(rng, 0.92, 1.08);
  seg.frication_bw_hz = seg.frication_hz * Uniform(rng, 0.3, 0.5);
  seg.gain_db = Uniform(rng, -8.0, -3.0);
  return seg;
}

WordTemplate RandomWord(std::mt19937_64& rng, double word_ms) {
  WordTemplate word;
  const int pattern = static_cast<int>(rng() % 3);
  const int v1 = static_cast<int>(rng() % kVowels.size());
  int v2 = static_cast<int>(rng() % kVowels.size());
  if (v2 == v1) v2 = (v2 + 3) % static_cast<int>(kVowels.size());
  const double u = word_ms / 500.0;
  switch (pattern) {
    case 0:
      word.segments = {VowelSegment(rng, v1, 250 * u), VowelSegment(rng, v2, 250 * u)};
      break;
    case 1:
      word.segments = {FricativeSegment(rng, 120 * u), VowelSegment(rng, v1, 190 * u),
                       VowelSegment(rng, v2, 190 * u)};
      break;
    default:
      word.segments = {VowelSegment(rng, v1, 200 * u), FricativeSegment(rng, 100 * u),
                       VowelSegment(rng, v2, 200 * u)};
      break;
  }
  word.f0_start_hz = Uniform(rng, 100.0, 140.0);
  word.f0_end_hz = word.f0_start_hz * Uniform(rng, 0.75, 1.05);
  return word;
}

// Per-millisecond trajectory of the word: formant frequencies, voicing and
// frication amplitude. Targets are crossfaded over 40 ms at segment
// boundaries; the word is ramped on and off over 15 ms.
struct Track {
  std::vector<std::array<double, 4>> formants;
  std::vector<double> voicing;
  std::vector<double> frication;
  std::vector<double> frication_hz;
  std::vector<double> frication_bw;
};

Track BuildTrack(const WordTemplate& word, int total_ms, double formant_scale,
                 const std::array<double, 4>& formant_jitter) {
  Track track;
  track.formants.resize(total_ms);
  track.voicing.assign(total_ms, 0.0);
  track.frication.assign(total_ms, 0.0);
  track.frication_hz.assign(total_ms, 4000.0);
  track.frication_bw.assign(total_ms, 1500.0);
  std::vector<double> bounds = {0.0};
  for (const WordSegment& s : word.segments) bounds.push_back(bounds.back() + s.duration_ms);
  const double scale_to_total = total_ms / bounds.back();
  for (double& b : bounds) b *= scale_to_total;
  const int n = static_cast<int>(word.segments.size());
  // Voiced targets for unvoiced segments come from the nearest voiced one.
  std::vector<std::array<double, 4>> targets(n);
  for (int i = 0; i < n; ++i) {
    int j = i;
    if (!word.segments[i].voiced) j = (i + 1 < n) ? i + 1 : i - 1;
    targets[i] = word.segments[j].formant_hz;
  }
  constexpr double kCrossfadeMs = 40.0;
  constexpr double kRampMs = 15.0;
  for (int t = 0; t < total_ms; ++t) {
    const double time = t + 0.5;
    int seg = 0;
    while (seg + 1 < n && time >= bounds[seg + 1]) ++seg;
    std::array<double, 4> f = targets[seg];
    // Blend toward the neighbor within half a crossfade of a boundary.
    if (seg + 1 < n && bounds[seg + 1] - time < kCrossfadeMs / 2) {
      const double w = 0.5 - (bounds[seg + 1] - time) / kCrossfadeMs;
      for (int i = 0; i < 4; ++i) f[i] = (1 - w) * f[i] + w * targets[seg + 1][i];
    } else if (seg > 0 && time - bounds[seg] < kCrossfadeMs / 2) {
      const double w = 0.5 - (time - bounds[seg]) / kCrossfadeMs;
      for (int i = 0; i < 4; ++i) f[i] = (1 - w) * f[i] + w * targets[seg - 1][i];
    }
    for (int i = 0; i < 4; ++i) track.formants[t][i] = f[i] * formant_scale * formant_jitter[i];
    const WordSegment& s = word.segments[seg];
    // 10 ms amplitude transitions at segment edges.
    const double edge = std::min(time - bounds[seg], bounds[seg + 1] - time);
    const double local = std::clamp(edge / 10.0 + 0.5, 0.0, 1.0);
    if (s.voiced) {
      track.voicing[t] = local;
    } else {
      track.frication[t] = local * std::pow(10.0, s.gain_db / 20.0);
      track.frication_hz[t] = s.frication_hz * formant_scale;
      track.frication_bw[t] = s.frication_bw_hz * formant_scale;
    }
    const double outer = std::min(time, total_ms - time);
    const double ramp = std::clamp(outer / kRampMs, 0.0, 1.0);
    const double smooth = 0.5 - 0.5 * std::cos(std::numbers::pi * ramp);
    track.voicing[t] *= smooth;
    track.frication[t] *= smooth;
  }
  return track;
}

std::vector<double> Synthesize(const WordTemplate& word, int samples, double fs,
                               uint64_t token_seed, bool vary) {
  std::mt19937_64 rng(token_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double f0_scale = 1.0, formant_scale = 1.0, level_db = 0.0;
  std::array<double, 4> jitter = {1.0, 1.0, 1.0, 1.0};
  if (vary) {
    f0_scale = std::exp(0.08 * gauss(rng));
    formant_scale = 1.0 + 0.03 * gauss(rng);
    for (double& j : jitter) j = 1.0 + 0.03 * gauss(rng);
    level_db = 1.0 * gauss(rng);
  }
  const int total_ms = static_cast<int>(std::lround(samples * 1000.0 / fs));
  const Track track = BuildTrack(word, total_ms, formant_scale, jitter);
  const double spm = fs / 1000.0;

  std::vector<double> voiced(samples, 0.0), fricated(samples, 0.0);
  std::array<Resonator, 4> formants;
  Resonator noise_band_a, noise_band_b;
  // Glottal spectrum: two real poles near 100 Hz.
  const double glottal = std::exp(-kTwoPi * 100.0 / fs);
  double g1 = 0.0, g2 = 0.0, phase = 0.0, prev_v = 0.0, prev_f = 0.0;
  for (int n = 0; n < samples; ++n) {
    const int t = std::min(total_ms - 1, static_cast<int>(n / spm));
    if (n % static_cast<int>(spm) == 0) {
      for (int i = 0; i < 4; ++i) {
        formants[i].Set(track.formants[t][i], kBandwidths[i], fs);
      }
      noise_band_a.Set(track.frication_hz[t], track.frication_bw[t], fs);
      noise_band_b.Set(track.frication_hz[t], track.frication_bw[t], fs);
    }
    const double progress = static_cast<double>(n) / samples;
    const double f0 =
        f0_scale * (word.f0_start_hz + (word.f0_end_hz - word.f0_start_hz) * progress);
    phase += f0 / fs;
    double pulse = 0.0;
    if (phase >= 1.0) {
      phase -= 1.0;
      pulse = 1.0;
    }
    const double g = pulse + 2.0 * glottal * g1 - glottal * glottal * g2;
    g2 = g1;
    g1 = g;
    double v = g * track.voicing[t];
    for (Resonator& r : formants) v = r(v);
    // Lip radiation: first difference.
    voiced[n] = v - prev_v;
    prev_v = v;
    const double noise = track.frication[t] > 0.0 ? gauss(rng) * track.frication[t] : 0.0;
    const double f = noise_band_b(noise_band_a(noise));
    fricated[n] = f - prev_f;
    prev_f = f;
  }
  // Components are scaled independently so that frication sits at its
  // segment gain relative to voicing.
  const double v_rms = Rms(voiced);
  double fric_peak = 0.0;
  for (double a : track.frication) fric_peak = std::max(fric_peak, a);
  const double f_rms = Rms(fricated);
  std::vector<double> out(samples);
  for (int n = 0; n < samples; ++n) {
    out[n] = (v_rms > 0 ? voiced[n] / v_rms : 0.0) +
             (f_rms > 0 ? fric_peak * fricated[n] / f_rms : 0.0);
  }
  NormalizeRms(out);
  const double gain = std::pow(10.0, level_db / 20.0);
  for (double& x : out) x *= gain;
  return out;
}

// Minimum distance between two words' formant trajectories in log
// frequency, averaged over time.
double WordDistance(const WordTemplate& a, const WordTemplate& b, int total_ms) {
  const Track ta = BuildTrack(a, total_ms, 1.0, {1, 1, 1, 1});
  const Track tb = BuildTrack(b, total_ms, 1.0, {1, 1, 1, 1});
  double d = 0.0;
  for (int t = 0; t < total_ms; ++t) {
    for (int i = 0; i < 3; ++i) d += std::abs(std::log(ta.formants[t][i] / tb.formants[t][i]));
    d += std::abs(ta.voicing[t] - tb.voicing[t]);
  }
  return d / total_ms;
}

std::vector<double> Welch(std::span<const double> x, int size) {
  RealFft fft(size);
  std::vector<double> window(size), frame(size), psd(fft.bins(), 0.0);
  std::vector<std::complex<double>> spectrum(fft.bins());
  for (int n = 0; n < size; ++n) window[n] = 0.5 - 0.5 * std::cos(kTwoPi * n / size);
  int count = 0;
  for (size_t start = 0; start + size <= x.size(); start += size / 2) {
    for (int n = 0; n < size; ++n) frame[n] = x[start + n] * window[n];
    fft.Forward(frame, spectrum);
    for (int k = 0; k < fft.bins(); ++k) psd[k] += std::norm(spectrum[k]);
    ++count;
  }
  for (double& p : psd) p /= std::max(count, 1);
  return psd;
}

// Gaussian noise of `length` samples whose spectrum follows `psd` (bins of
// a `psd_size`-point transform). Returns the shaped spectrum.
std::vector<std::complex<double>> ShapedSpectrum(std::mt19937_64& rng, int length,
                                                 const std::vector<double>& psd, int psd_size) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  RealFft fft(length);
  std::vector<double> noise(length);
  for (double& v : noise) v = gauss(rng);
  std::vector<std::complex<double>> spectrum(fft.bins());
  fft.Forward(noise, spectrum);
  const double ratio = static_cast<double>(psd_size) / length;
  for (int k = 0; k < fft.bins(); ++k) {
    const double pos = k * ratio;
    const int i = std::min(static_cast<int>(pos), static_cast<int>(psd.size()) - 2);
    const double w = pos - i;
    const double p = (1 - w) * psd[i] + w * psd[i + 1];
    spectrum[k] *= std::sqrt(p);
  }
  spectrum[0] = 0.0;
  return spectrum;
}

std::vector<double> InverseOf(const std::vector<std::complex<double>>& spectrum, int length) {
  RealFft fft(length);
  std::vector<double> out(length);
  fft.Inverse(spectrum, out);
  return out;
}

std::vector<double> OnOffEnvelope(std::mt19937_64& rng, int total_ms, const CorpusConfig& c) {
  std::vector<double> env(total_ms, 0.0);
  int t = 0;
  bool on = (rng() & 1) != 0;
  constexpr int kRampMs = 5;
  while (t < total_ms) {
    if (on) {
      const int len = static_cast<int>(std::lround(Uniform(rng, c.min_on_ms, c.max_on_ms)));
      for (int i = 0; i < len && t + i < total_ms; ++i) {
        const int edge = std::min(i, len - 1 - i);
        const double r = std::min(1.0, (edge + 0.5) / kRampMs);
        env[t + i] = 0.5 - 0.5 * std::cos(std::numbers::pi * r);
      }
      t += len;
    } else {
      t += static_cast<int>(std::lround(Uniform(rng, 10.0, c.max_gap_ms)));
    }
    on = !on;
  }
  return env;
}

}  // namespace

std::string MaskerName(MaskerKind kind) {
  return kind == MaskerKind::kStationary ? "stationary" : "fluctuating";
}

MaskerKind ParseMasker(const std::string& name) {
  if (name == "stationary") return MaskerKind::kStationary;
  if (name == "fluctuating") return MaskerKind::kFluctuating;
  throw ConfigError("unknown masker '" + name + "' (stationary, fluctuating)");
}

uint64_t MixSeed(uint64_t a, uint64_t b) {
  uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

int SyntheticCorpus::word_samples() const {
  return static_cast<int>(std::lround(config.word_ms * config.sample_rate / 1000.0));
}

std::vector<double> SyntheticCorpus::RenderToken(int word, uint64_t token_seed) const {
  return Synthesize(words.at(word), word_samples(), config.sample_rate,
                    MixSeed(token_seed, static_cast<uint64_t>(word)), true);
}

const std::vector<double>& SyntheticCorpus::masker(MaskerKind kind) const {
  return kind == MaskerKind::kStationary ? stationary_masker : fluctuating_masker;
}

SyntheticCorpus GenerateCorpus(const CorpusConfig& config, uint64_t seed) {
  if (config.num_words < 10) throw ConfigError("the vocabulary needs at least 10 words");
  if (config.masker_length < (1 << 16)) throw ConfigError("masker length too short");
  SyntheticCorpus corpus;
  corpus.config = config;
  corpus.seed = seed;
  std::mt19937_64 rng(MixSeed(seed, 1));
  const int total_ms = static_cast<int>(std::lround(config.word_ms));
  // Rejection sampling keeps the words mutually distinct.
  constexpr double kMinDistance = 0.12;
  while (static_cast<int>(corpus.words.size()) < config.num_words) {
    WordTemplate candidate = RandomWord(rng, config.word_ms);
    bool distinct = true;
    for (const WordTemplate& w : corpus.words) {
      if (WordDistance(w, candidate, total_ms) < kMinDistance) {
        distinct = false;
        break;
      }
    }
    if (distinct) corpus.words.push_back(std::move(candidate));
  }

  // Long-term spectrum of the vocabulary from several speaker variants.
  constexpr int kPsdSize = 4096;
  constexpr int kVariants = 8;
  std::vector<double> speech;
  for (int v = 0; v < kVariants; ++v) {
    for (int w = 0; w < config.num_words; ++w) {
      const std::vector<double> token = corpus.RenderToken(w, MixSeed(seed, 1000 + v));
      speech.insert(speech.end(), token.begin(), token.end());
    }
  }
  const std::vector<double> ltass = Welch(speech, kPsdSize);

  const int length = config.masker_length;
  std::mt19937_64 noise_rng(MixSeed(seed, 2));
  corpus.stationary_masker = InverseOf(ShapedSpectrum(noise_rng, length, ltass, kPsdSize), length);
  NormalizeRms(corpus.stationary_masker);

  // Fluctuating masker: three bands of a second shaped noise.
  const double nyquist = config.sample_rate / 2.0;
  corpus.band_edges_hz = {0.0, 800.0, 2400.0, nyquist};
  const std::vector<std::complex<double>> spectrum =
      ShapedSpectrum(noise_rng, length, ltass, kPsdSize);
  const int masker_ms = static_cast<int>(length * 1000.0 / config.sample_rate) + 2;
  std::mt19937_64 env_rng(MixSeed(seed, 3));
  corpus.fluctuating_masker.assign(length, 0.0);
  const double spm = config.sample_rate / 1000.0;
  for (int b = 0; b < 3; ++b) {
    std::vector<std::complex<double>> band = spectrum;
    for (size_t k = 0; k < band.size(); ++k) {
      const double hz = k * config.sample_rate / length;
      if (hz < corpus.band_edges_hz[b] || hz >= corpus.band_edges_hz[b + 1]) band[k] = 0.0;
    }
    const std::vector<double> signal = InverseOf(band, length);
    corpus.fluctuating_envelopes[b] = OnOffEnvelope(env_rng, masker_ms, config);
    const std::vector<double>& env = corpus.fluctuating_envelopes[b];
    for (int n = 0; n < length; ++n) {
      const double pos = n / spm;
      const int i = static_cast<int>(pos);
      const double w = pos - i;
      const double e = (1 - w) * env[i] + w * env[i + 1];
      corpus.fluctuating_masker[n] += e * signal[n];
    }
  }
  NormalizeRms(corpus.fluctuating_masker);
  return corpus;
}

MixtureStream BuildStream(const SyntheticCorpus& corpus, const StreamLayout& layout,
                          const StreamSpec& spec, const Calibration& calibration) {
  const double fs = corpus.config.sample_rate;
  MixtureStream stream;
  stream.slot_samples = static_cast<int>(std::lround(layout.slot_ms * fs / 1000.0));
  const int offset = static_cast<int>(std::lround(layout.word_offset_ms * fs / 1000.0));
  if (offset + corpus.word_samples() > stream.slot_samples) {
    throw ConfigError("token slot too short for a word");
  }
  const size_t total = static_cast<size_t>(stream.slot_samples) * layout.tokens;
  stream.audio.assign(total, 0.0);
  stream.labels.resize(layout.tokens);
  const double speech_gain = DbSplToRms(spec.noise_dbspl + spec.snr_db, calibration);
  const int words = corpus.config.num_words;
  for (int s = 0; s < layout.tokens; ++s) {
    stream.labels[s] = s % words;
    const std::vector<double> token = corpus.RenderToken(s % words, MixSeed(spec.seed, s));
    double* dst = stream.audio.data() + static_cast<size_t>(s) * stream.slot_samples + offset;
    for (size_t n = 0; n < token.size(); ++n) dst[n] = speech_gain * token[n];
  }
  const std::vector<double>& masker = corpus.masker(spec.masker);
  std::mt19937_64 rng(MixSeed(spec.seed, 0xA5A5));
  size_t pos = rng() % masker.size();
  const double noise_gain = DbSplToRms(spec.noise_dbspl, calibration);
  for (size_t n = 0; n < total; ++n) {
    stream.audio[n] += noise_gain * masker[pos];
    if (++pos == masker.size()) pos = 0;
  }
  return stream;
}

}  // namespace platt
