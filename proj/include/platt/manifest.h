#ifndef PLATT_MANIFEST_H_
#define PLATT_MANIFEST_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace platt {

uint64_t Fnv1a64(std::string_view bytes);
// Hash of a file's contents; throws IoError if unreadable.
uint64_t HashFile(const std::string& path);
std::string HexHash(uint64_t hash);

struct ArtifactRecord {
  std::string role;  // e.g. "input", "output", "csv"
  std::string path;
  std::string fnv1a64;
};

// Everything needed to rerun a subcommand and check its outputs.
struct RunManifest {
  std::string tool_version;
  std::string subcommand;
  std::map<std::string, std::string> config;  // resolved key/value pairs
  std::map<std::string, std::string> arguments;
  std::vector<uint64_t> seeds;
  std::vector<ArtifactRecord> artifacts;
  double dbspl_at_fullscale = 110.0;

  void AddArtifact(const std::string& role, const std::string& path);
  std::string ToJson() const;
  static RunManifest FromJson(const std::string& text);
  void Write(const std::string& path) const;
  static RunManifest Read(const std::string& path);
};

extern const char kToolVersion[];

}  // namespace platt

#endif  // PLATT_MANIFEST_H_
