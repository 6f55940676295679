#include "platt/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "platt/common.h"

namespace platt {
namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint32_t Le32(const unsigned char* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<uint32_t>(p[3]) << 24);
}
uint16_t Le16(const unsigned char* p) { return static_cast<uint16_t>(p[0] | (p[1] << 8)); }

void Put32(std::vector<unsigned char>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}
void Put16(std::vector<unsigned char>& out, uint16_t v) {
  out.push_back(static_cast<unsigned char>(v));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

}  // namespace

Audio ReadWav(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open " + path);
  const std::vector<unsigned char> data((std::istreambuf_iterator<char>(file)),
                                        std::istreambuf_iterator<char>());
  const auto fail = [&](const std::string& why) -> IoError {
    return IoError(path + ": " + why);
  };
  if (data.size() < 12 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
      std::memcmp(data.data() + 8, "WAVE", 4) != 0) {
    throw fail("not a RIFF/WAVE file");
  }
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const unsigned char* samples = nullptr;
  size_t sample_bytes = 0;
  size_t pos = 12;
  while (pos + 8 <= data.size()) {
    const unsigned char* chunk = data.data() + pos;
    const uint32_t size = Le32(chunk + 4);
    const size_t body = pos + 8;
    const size_t available = std::min<size_t>(size, data.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (available < 16) throw fail("truncated fmt chunk");
      format = Le16(chunk + 8);
      channels = Le16(chunk + 10);
      rate = Le32(chunk + 12);
      bits = Le16(chunk + 22);
      if (format == kFormatExtensible) {
        if (available < 40) throw fail("truncated extensible fmt chunk");
        format = Le16(chunk + 8 + 24);
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      samples = data.data() + body;
      sample_bytes = available;
    }
    pos = body + size + (size & 1);
  }
  if (rate == 0) throw fail("missing fmt chunk");
  if (samples == nullptr) throw fail("missing data chunk");
  if (channels != 1) throw fail("only mono files are supported (got " +
                                std::to_string(channels) + " channels)");
  Audio audio;
  audio.sample_rate = rate;
  if (format == kFormatPcm && bits == 16) {
    audio.format = SampleFormat::kPcm16;
    const size_t n = sample_bytes / 2;
    audio.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      audio.samples[i] = static_cast<int16_t>(Le16(samples + 2 * i)) / 32768.0;
    }
  } else if (format == kFormatPcm && bits == 24) {
    audio.format = SampleFormat::kPcm24;
    const size_t n = sample_bytes / 3;
    audio.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      const unsigned char* p = samples + 3 * i;
      int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      audio.samples[i] = v / 8388608.0;
    }
  } else if (format == kFormatFloat && bits == 32) {
    audio.format = SampleFormat::kFloat32;
    const size_t n = sample_bytes / 4;
    audio.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      const uint32_t bits32 = Le32(samples + 4 * i);
      float f;
      std::memcpy(&f, &bits32, 4);
      audio.samples[i] = f;
    }
  } else {
    throw fail("unsupported sample format (format tag " + std::to_string(format) + ", " +
               std::to_string(bits) + " bits)");
  }
  return audio;
}

void WriteWav(const std::string& path, const Audio& audio) {
  if (!(audio.sample_rate > 0.0) || audio.sample_rate != std::floor(audio.sample_rate)) {
    throw IoError("cannot write a WAV file with sample rate " +
                  std::to_string(audio.sample_rate));
  }
  const uint16_t bytes = audio.format == SampleFormat::kPcm16 ? 2
                         : audio.format == SampleFormat::kPcm24 ? 3
                                                                : 4;
  const uint16_t tag = audio.format == SampleFormat::kFloat32 ? kFormatFloat : kFormatPcm;
  const uint32_t rate = static_cast<uint32_t>(audio.sample_rate);
  const uint32_t data_size = static_cast<uint32_t>(audio.samples.size() * bytes);
  std::vector<unsigned char> out;
  out.reserve(44 + data_size + 1);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  Put32(out, 36 + data_size + (data_size & 1));
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  Put32(out, 16);
  Put16(out, tag);
  Put16(out, 1);
  Put32(out, rate);
  Put32(out, rate * bytes);
  Put16(out, bytes);
  Put16(out, static_cast<uint16_t>(8 * bytes));
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  Put32(out, data_size);
  for (double x : audio.samples) {
    if (audio.format == SampleFormat::kFloat32) {
      const float f = static_cast<float>(x);
      uint32_t v;
      std::memcpy(&v, &f, 4);
      Put32(out, v);
    } else {
      const double full = audio.format == SampleFormat::kPcm16 ? 32768.0 : 8388608.0;
      const double r = std::clamp(std::nearbyint(x * full), -full, full - 1.0);
      const int32_t v = static_cast<int32_t>(r);
      for (int i = 0; i < bytes; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
  }
  if (data_size & 1) out.push_back(0);
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot create " + path);
  file.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError("write failed: " + path);
}

SampleFormat ParseSampleFormat(const std::string& name) {
  if (name == "pcm16") return SampleFormat::kPcm16;
  if (name == "pcm24") return SampleFormat::kPcm24;
  if (name == "float32") return SampleFormat::kFloat32;
  throw ConfigError("unknown sample format '" + name + "' (pcm16, pcm24, float32)");
}

std::string SampleFormatName(SampleFormat format) {
  switch (format) {
    case SampleFormat::kPcm16:
      return "pcm16";
    case SampleFormat::kPcm24:
      return "pcm24";
    case SampleFormat::kFloat32:
      return "float32";
  }
  return "float32";
}

}  // namespace platt
