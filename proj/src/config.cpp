// Copyright 2026 The tunable-bus Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tbus/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tbus/errors.hpp"
#include "tbus/units.hpp"

namespace tbus {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_number(const std::string& key, const std::string& value) {
  double x = 0.0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, x);
  if (ec != std::errc() || ptr != end || !std::isfinite(x))
    throw ConfigError(key + ": expected a number, got '" + value + "'");
  return x;
}

}  // namespace

KeyValueTable KeyValueTable::parse(std::istream& in, const std::string& source) {
  KeyValueTable t;
  t.source_ = source;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError(where + ": empty key or value");
    if (!t.entries_.emplace(key, value).second)
      throw ConfigError(where + ": duplicate key '" + key + "'");
  }
  return t;
}

KeyValueTable KeyValueTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse(in, path.string());
}

void KeyValueTable::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + assignment + "'");
  const std::string key = trim(std::string_view(assignment).substr(0, eq));
  const std::string value = trim(std::string_view(assignment).substr(eq + 1));
  if (key.empty() || value.empty()) throw ConfigError("--set: empty key or value in '" + assignment + "'");
  entries_[key] = value;
}

bool KeyValueTable::contains(const std::string& key) const { return entries_.count(key) != 0; }

const std::string& KeyValueTable::raw(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(source_ + ": missing required key '" + key + "'");
  used_.insert(key);
  return it->second;
}

std::string KeyValueTable::text(const std::string& key, const std::string& fallback) const {
  return contains(key) ? raw(key) : fallback;
}

double KeyValueTable::number(const std::string& key) const { return to_number(key, raw(key)); }

double KeyValueTable::number(const std::string& key, double fallback) const {
  return contains(key) ? number(key) : fallback;
}

long long KeyValueTable::integer(const std::string& key, long long fallback) const {
  if (!contains(key)) return fallback;
  const std::string& v = raw(key);
  long long x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return x;
}

std::vector<double> KeyValueTable::numbers(const std::string& key,
                                           const std::vector<double>& fallback) const {
  if (!contains(key)) return fallback;
  std::vector<double> out;
  std::stringstream ss(raw(key));
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_number(key, trim(item)));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

void KeyValueTable::reject_unused(const std::string& context) const {
  for (const auto& [k, v] : entries_)
    if (!used_.count(k)) throw ConfigError(context + ": unknown key '" + k + "'");
}

// ---------------------------------------------------------------------------

DeviceConfig parse_device_config(const KeyValueTable& t) {
  const long long version = t.integer("schema_version", -1);
  if (version != kDeviceSchemaVersion)
    throw ConfigError("schema_version: expected " + std::to_string(kDeviceSchemaVersion) +
                      ", got " + std::to_string(version));
  using namespace units;
  DeviceConfig c;
  for (int q = 0; q < 2; ++q) {
    const std::string p = "q" + std::to_string(q + 1) + ".";
    c.params.omega_q[q] = ghz(t.number(p + "frequency_ghz"));
    c.params.alpha_q[q] = mhz(t.number(p + "anharmonicity_mhz"));
    c.params.g_q[q] = mhz(t.number(p + "coupling_mhz"));
    c.params.t1[q] = us(t.number(p + "t1_us"));
    c.params.t2[q] = us(t.number(p + "t2_us"));
  }
  c.params.omega_tb0 = ghz(t.number("bus.frequency_ghz"));
  c.params.alpha_tb = mhz(t.number("bus.anharmonicity_mhz", -300.0));
  c.bias = t.number("bias_phi0", kReferenceBias);
  t.reject_unused("device config");
  c.params.validate_at(c.bias);
  return c;
}

DeviceConfig load_device_config(const std::filesystem::path& path) {
  return parse_device_config(KeyValueTable::load(path));
}

std::string format_device_config(const DeviceConfig& c) {
  using namespace units;
  std::ostringstream os;
  os.precision(17);
  os << "schema_version = " << kDeviceSchemaVersion << "\n";
  for (int q = 0; q < 2; ++q) {
    const std::string p = "q" + std::to_string(q + 1) + ".";
    os << p << "frequency_ghz = " << to_ghz(c.params.omega_q[q]) << "\n"
       << p << "anharmonicity_mhz = " << to_mhz(c.params.alpha_q[q]) << "\n"
       << p << "coupling_mhz = " << to_mhz(c.params.g_q[q]) << "\n"
       << p << "t1_us = " << c.params.t1[q] * 1e6 << "\n"
       << p << "t2_us = " << c.params.t2[q] * 1e6 << "\n";
  }
  os << "bus.frequency_ghz = " << to_ghz(c.params.omega_tb0) << "\n"
     << "bus.anharmonicity_mhz = " << to_mhz(c.params.alpha_tb) << "\n"
     << "bias_phi0 = " << c.bias << "\n";
  return os.str();
}

}  // namespace tbus
