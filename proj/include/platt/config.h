#ifndef PLATT_CONFIG_H_
#define PLATT_CONFIG_H_

#include <map>
#include <string>
#include <vector>

#include "platt/engine.h"

namespace platt {

// Plain-text configuration: one "key = value" per line, '#' starts a
// comment, "include <path>" splices another file (relative to the including
// file) at that point. Later assignments override earlier ones.
class KeyValueConfig {
 public:
  static KeyValueConfig ParseFile(const std::string& path);
  static KeyValueConfig ParseString(const std::string& text, const std::string& base_dir = ".",
                                    const std::string& source = "<string>");

  void Set(const std::string& key, const std::string& value);
  // "key=value"; throws ConfigError when there is no '='.
  void ApplyOverride(const std::string& assignment);

  bool Has(const std::string& key) const { return values_.count(key) > 0; }
  // Throw ConfigError naming the key when it is missing or malformed.
  const std::string& Get(const std::string& key) const;
  double GetDouble(const std::string& key) const;
  std::vector<double> GetDoubleList(const std::string& key) const;
  // Comma-separated items, trimmed; empty items are an error.
  std::vector<std::string> GetList(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  std::string ToString() const;

 private:
  void ParseInto(const std::string& text, const std::string& base_dir,
                 const std::string& source, int depth);

  std::map<std::string, std::string> values_;
};

struct ConfigKey {
  const char* name;
  const char* default_value;
  const char* help;
};

// Every engine key with its default.
const std::vector<ConfigKey>& EngineConfigKeys();
// Defaults as a commented config file.
std::string DumpDefaults();
KeyValueConfig DefaultKeyValues();

// Builds an engine configuration. With require_all, every key listed by
// EngineConfigKeys must be present; otherwise missing keys take defaults.
EngineConfig EngineConfigFromKeyValues(const KeyValueConfig& values, bool require_all);

// Level curve: a single number, or "hz:db" anchors separated by commas,
// interpolated linearly in log frequency and held constant beyond the ends.
ChannelVector ParseLevelCurve(const std::string& text, const FilterbankSpec& spec,
                              const std::string& key);

}  // namespace platt

#endif  // PLATT_CONFIG_H_
