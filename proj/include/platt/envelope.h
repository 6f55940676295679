#ifndef PLATT_ENVELOPE_H_
#define PLATT_ENVELOPE_H_

#include <span>
#include <vector>

#include "platt/common.h"
#include "platt/filterbank.h"
#include "platt/kernels.h"
#include "platt/thresholds.h"

namespace platt {

// Maps digital amplitudes to dB SPL. A full-scale sinusoid (amplitude 1)
// corresponds to dbspl_at_fullscale.
struct Calibration {
  double dbspl_at_fullscale = 110.0;
};

// Level of a sinusoid with the given amplitude (equivalently a band
// magnitude, since a tone at a channel's center keeps its amplitude).
// Zero maps to -inf.
double ToDbSpl(double magnitude, const Calibration& calibration);
// Level of a signal with the given RMS value.
double RmsToDbSpl(double rms, const Calibration& calibration);
double DbSplToRms(double dbspl, const Calibration& calibration);

struct EnvelopeFrame {
  double timestamp_ms = 0.0;  // end of the frame
  ChannelVector levels{};     // dB SPL, floored at the hearing threshold
};

struct EnvelopeParams {
  double hold_ms = 15.0;
  double decay_db_per_ms = 1.0;
};

// Per-channel max-hold / decay envelope. A magnitude at or above the held
// value replaces it and restarts the hold timer; once the timer has run out
// the held value decays at decay_db_per_ms, never below the current
// magnitude. Runs at audio rate; frames are read out at 1 ms boundaries by
// the caller.
class EnvelopeTracker {
 public:
  EnvelopeTracker(const FilterbankSpec& spec, const Calibration& calibration,
                  const EnvelopeParams& params = {},
                  const ThresholdTable& thresholds = ThresholdTable::Iso226());

  void Process(const BandBlock& bands);
  // Squared magnitudes, sample-major with stride kChannelStride.
  void ProcessPower(std::span<const double> power, int length);

  // Held levels in dB SPL, floored at the threshold.
  ChannelVector Levels() const;
  const ChannelVector& thresholds() const { return thresholds_; }
  int hold_samples() const { return hold_samples_; }
  double decay_db_per_sample() const { return decay_db_per_sample_; }

  // For kernels that advance the envelope themselves
  // (Filterbank::AnalyzeTracked).
  const EnvelopeRule& rule() const { return rule_; }
  EnvelopeState& mutable_state() { return state_; }

 private:
  Calibration calibration_;
  ChannelVector thresholds_;
  int hold_samples_;
  double decay_db_per_sample_;
  EnvelopeRule rule_;
  EnvelopeState state_;
};

// 10 log10(power) to within 1e-12 dB; -inf for zero. Vectorizable.
void PowerToDb(std::span<const double> power, std::span<double> db);

// Convenience for whole signals: band magnitudes per sample (outer index
// is the sample) in, one frame per started 1 ms out.
std::vector<EnvelopeFrame> TrackEnvelope(const FilterbankSpec& spec,
                                         std::span<const ChannelVector> magnitudes,
                                         const Calibration& calibration,
                                         const EnvelopeParams& params = {});

}  // namespace platt

#endif  // PLATT_ENVELOPE_H_
