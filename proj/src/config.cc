#include "platt/config.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace platt {
namespace {

constexpr int kMaxIncludeDepth = 16;

std::string Trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool ParseNumber(const std::string& text, double& out) {
  const std::string t = Trim(text);
  if (t.empty()) return false;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  return ec == std::errc() && end == t.data() + t.size();
}

std::vector<std::string> Split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(Trim(item));
  return parts;
}

}  // namespace

KeyValueConfig KeyValueConfig::ParseFile(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open config file " + path);
  std::stringstream text;
  text << file.rdbuf();
  KeyValueConfig config;
  config.ParseInto(text.str(), std::filesystem::path(path).parent_path().string(), path, 0);
  return config;
}

KeyValueConfig KeyValueConfig::ParseString(const std::string& text, const std::string& base_dir,
                                           const std::string& source) {
  KeyValueConfig config;
  config.ParseInto(text, base_dir, source, 0);
  return config;
}

void KeyValueConfig::ParseInto(const std::string& text, const std::string& base_dir,
                               const std::string& source, int depth) {
  if (depth > kMaxIncludeDepth) throw ConfigError(source + ": includes nested too deeply");
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(number);
    if (line.rfind("include", 0) == 0 && line.find('=') == std::string::npos) {
      const std::string target = Trim(line.substr(7));
      if (target.empty()) throw ConfigError(where + ": include needs a path");
      std::filesystem::path p(target);
      if (p.is_relative()) p = std::filesystem::path(base_dir.empty() ? "." : base_dir) / p;
      std::ifstream file(p);
      if (!file) throw IoError(where + ": cannot open included file " + p.string());
      std::stringstream sub;
      sub << file.rdbuf();
      ParseInto(sub.str(), p.parent_path().string(), p.string(), depth + 1);
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = Trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    values_[key] = Trim(line.substr(eq + 1));
  }
}

void KeyValueConfig::Set(const std::string& key, const std::string& value) {
  values_[Trim(key)] = Trim(value);
}

void KeyValueConfig::ApplyOverride(const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos || Trim(assignment.substr(0, eq)).empty()) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  Set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

const std::string& KeyValueConfig::Get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
  return it->second;
}

double KeyValueConfig::GetDouble(const std::string& key) const {
  double v = 0.0;
  if (!ParseNumber(Get(key), v)) {
    throw ConfigError("config key '" + key + "' must be a number, got '" + Get(key) + "'");
  }
  return v;
}

std::vector<double> KeyValueConfig::GetDoubleList(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& part : Split(Get(key), ',')) {
    double v = 0.0;
    if (!ParseNumber(part, v)) {
      throw ConfigError("config key '" + key + "' must be a comma-separated number list");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> KeyValueConfig::GetList(const std::string& key) const {
  std::vector<std::string> out = Split(Get(key), ',');
  for (const std::string& item : out) {
    if (item.empty()) throw ConfigError("config key '" + key + "' has an empty list item");
  }
  return out;
}

std::string KeyValueConfig::ToString() const {
  std::ostringstream out;
  for (const auto& [key, value] : values_) out << key << " = " << value << '\n';
  return out.str();
}

const std::vector<ConfigKey>& EngineConfigKeys() {
  static const std::vector<ConfigKey> keys = {
      {"sample_rate", "48000", "Hz; must be a whole number of samples per ms, >= 32000"},
      {"calibration.dbspl_at_fullscale", "110",
       "dB SPL of a full-scale sinusoid (amplitude 1)"},
      {"envelope.hold_ms", "15", "hold time of the envelope maxima"},
      {"envelope.decay_db_per_ms", "1", "decay rate after the hold time"},
      {"platt.expansion", "1", "factor k applied to difference 2 (PLATT-k), 1..16"},
      {"platt.base_map", "identity", "identity | linear"},
      {"platt.input.lower", "250:30, 500:25, 4000:25, 8000:30", "dB SPL level curve"},
      {"platt.input.upper", "105", "dB SPL level curve"},
      {"platt.output.lower", "250:30, 500:25, 4000:25, 8000:30", "dB SPL level curve"},
      {"platt.output.upper", "105", "dB SPL level curve"},
      {"platt.smoothing_widths", "8, 16, 32, 64", "Hanning widths in channels"},
      {"platt.propagation_fwhm", "6, 12", "factor propagation FWHM for diffs 3 and 4"},
  };
  return keys;
}

KeyValueConfig DefaultKeyValues() {
  KeyValueConfig config;
  for (const ConfigKey& key : EngineConfigKeys()) config.Set(key.name, key.default_value);
  return config;
}

std::string DumpDefaults() {
  std::ostringstream out;
  out << "# PLATT engine configuration defaults.\n"
         "# Level curves are a single dB SPL value or comma-separated hz:db anchors\n"
         "# interpolated in log frequency.\n";
  for (const ConfigKey& key : EngineConfigKeys()) {
    out << "\n# " << key.help << '\n' << key.name << " = " << key.default_value << '\n';
  }
  return out.str();
}

ChannelVector ParseLevelCurve(const std::string& text, const FilterbankSpec& spec,
                              const std::string& key) {
  double uniform = 0.0;
  if (ParseNumber(text, uniform)) return Filled(uniform);
  std::vector<std::pair<double, double>> anchors;
  for (const std::string& part : Split(text, ',')) {
    const size_t colon = part.find(':');
    double hz = 0.0, db = 0.0;
    if (colon == std::string::npos || !ParseNumber(part.substr(0, colon), hz) ||
        !ParseNumber(part.substr(colon + 1), db) || !(hz > 0.0)) {
      throw ConfigError("config key '" + key + "': expected a number or hz:db anchors, got '" +
                        text + "'");
    }
    anchors.emplace_back(hz, db);
  }
  if (!std::is_sorted(anchors.begin(), anchors.end())) {
    throw ConfigError("config key '" + key + "': anchors must be in increasing frequency");
  }
  ChannelVector out;
  for (int c = 0; c < kNumChannels; ++c) {
    const double f = spec.channel(c).center_hz;
    if (f <= anchors.front().first) {
      out[c] = anchors.front().second;
    } else if (f >= anchors.back().first) {
      out[c] = anchors.back().second;
    } else {
      size_t i = 1;
      while (anchors[i].first < f) ++i;
      const auto [f0, v0] = anchors[i - 1];
      const auto [f1, v1] = anchors[i];
      out[c] = v0 + std::log(f / f0) / std::log(f1 / f0) * (v1 - v0);
    }
  }
  return out;
}

EngineConfig EngineConfigFromKeyValues(const KeyValueConfig& values, bool require_all) {
  KeyValueConfig merged = DefaultKeyValues();
  for (const ConfigKey& key : EngineConfigKeys()) {
    if (values.Has(key.name)) {
      merged.Set(key.name, values.Get(key.name));
    } else if (require_all) {
      throw ConfigError("missing config key '" + std::string(key.name) + "'");
    }
  }
  EngineConfig config;
  config.sample_rate = merged.GetDouble("sample_rate");
  const FilterbankSpec spec = DesignFilterbank(config.sample_rate);
  config.calibration.dbspl_at_fullscale = merged.GetDouble("calibration.dbspl_at_fullscale");
  config.envelope.hold_ms = merged.GetDouble("envelope.hold_ms");
  config.envelope.decay_db_per_ms = merged.GetDouble("envelope.decay_db_per_ms");
  PlattConfig& platt = config.platt;
  platt.expansion = merged.GetDouble("platt.expansion");
  const std::string& map = merged.Get("platt.base_map");
  if (map == "identity") {
    platt.base_map = BaseMap::kIdentity;
  } else if (map == "linear") {
    platt.base_map = BaseMap::kLinear;
  } else {
    throw ConfigError("config key 'platt.base_map' must be identity or linear, got '" + map +
                      "'");
  }
  for (const char* side : {"input", "output"}) {
    DynamicRange& range = std::string(side) == "input" ? platt.input_dr : platt.output_dr;
    const std::string lower = std::string("platt.") + side + ".lower";
    const std::string upper = std::string("platt.") + side + ".upper";
    range.lower = ParseLevelCurve(merged.Get(lower), spec, lower);
    range.upper = ParseLevelCurve(merged.Get(upper), spec, upper);
  }
  const auto ints = [&](const std::string& key, size_t count) {
    const std::vector<double> list = merged.GetDoubleList(key);
    if (list.size() != count) {
      throw ConfigError("config key '" + key + "' needs " + std::to_string(count) + " values");
    }
    std::vector<int> out;
    for (double v : list) {
      if (v != std::floor(v)) throw ConfigError("config key '" + key + "' needs integers");
      out.push_back(static_cast<int>(v));
    }
    return out;
  };
  const std::vector<int> widths = ints("platt.smoothing_widths", 4);
  std::copy(widths.begin(), widths.end(), platt.smoothing_widths.begin());
  const std::vector<int> fwhm = ints("platt.propagation_fwhm", 2);
  std::copy(fwhm.begin(), fwhm.end(), platt.propagation_fwhm.begin());
  config.Validate();
  return config;
}

}  // namespace platt
