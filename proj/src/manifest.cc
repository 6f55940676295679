#include "platt/manifest.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "platt/common.h"

namespace platt {

const char kToolVersion[] = "platt 1.0.0";

uint64_t Fnv1a64(std::string_view bytes) {
  uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

uint64_t HashFile(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open " + path + " for hashing");
  std::stringstream content;
  content << file.rdbuf();
  return Fnv1a64(content.str());
}

std::string HexHash(uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

void RunManifest::AddArtifact(const std::string& role, const std::string& path) {
  artifacts.push_back({role, path, HexHash(HashFile(path))});
}

std::string RunManifest::ToJson() const {
  nlohmann::ordered_json j;
  j["tool_version"] = tool_version;
  j["subcommand"] = subcommand;
  j["calibration"] = {{"dbspl_at_fullscale", dbspl_at_fullscale}};
  j["arguments"] = arguments;
  j["config"] = config;
  j["seeds"] = seeds;
  j["artifacts"] = nlohmann::ordered_json::array();
  for (const ArtifactRecord& a : artifacts) {
    j["artifacts"].push_back({{"role", a.role}, {"path", a.path}, {"fnv1a64", a.fnv1a64}});
  }
  return j.dump(2) + "\n";
}

RunManifest RunManifest::FromJson(const std::string& text) {
  RunManifest m;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    m.tool_version = j.at("tool_version").get<std::string>();
    m.subcommand = j.at("subcommand").get<std::string>();
    m.dbspl_at_fullscale = j.at("calibration").at("dbspl_at_fullscale").get<double>();
    m.arguments = j.at("arguments").get<std::map<std::string, std::string>>();
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    m.seeds = j.at("seeds").get<std::vector<uint64_t>>();
    for (const auto& a : j.at("artifacts")) {
      m.artifacts.push_back({a.at("role").get<std::string>(), a.at("path").get<std::string>(),
                             a.at("fnv1a64").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

void RunManifest::Write(const std::string& path) const {
  std::ofstream file(path);
  if (!file) throw IoError("cannot create " + path);
  file << ToJson();
  if (!file) throw IoError("write failed: " + path);
}

RunManifest RunManifest::Read(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open manifest " + path);
  std::stringstream text;
  text << file.rdbuf();
  return FromJson(text.str());
}

}  // namespace platt
