#ifndef PLATT_WAV_H_
#define PLATT_WAV_H_

#include <string>
#include <vector>

namespace platt {

enum class SampleFormat { kPcm16, kPcm24, kFloat32 };

struct Audio {
  double sample_rate = 0.0;
  std::vector<double> samples;  // full scale is +-1
  SampleFormat format = SampleFormat::kFloat32;  // as read, or to write
};

// Mono RIFF/WAVE with 16- or 24-bit PCM or 32-bit IEEE float samples.
// Anything else raises IoError.
Audio ReadWav(const std::string& path);
// PCM output is rounded and clipped to the representable range.
void WriteWav(const std::string& path, const Audio& audio);

SampleFormat ParseSampleFormat(const std::string& name);
std::string SampleFormatName(SampleFormat format);

}  // namespace platt

#endif  // PLATT_WAV_H_
