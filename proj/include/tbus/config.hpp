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

#pragma once

// Plain-text configuration: one `key = value` per line, `#` starts a comment.
// A device file carries an explicit schema version and rejects unknown keys.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tbus/device.hpp"

namespace tbus {

inline constexpr int kDeviceSchemaVersion = 1;

/// Ordered key/value table that remembers which keys were read, so callers
/// can reject leftovers.
class KeyValueTable {
 public:
  KeyValueTable() = default;
  static KeyValueTable parse(std::istream& in, const std::string& source);
  static KeyValueTable load(const std::filesystem::path& path);

  /// Adds or replaces one entry from a `key=value` token.
  void set(const std::string& assignment);

  bool contains(const std::string& key) const;
  const std::string& raw(const std::string& key) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  long long integer(const std::string& key, long long fallback) const;
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const;

  /// Throws ConfigError naming the first key never read.
  void reject_unused(const std::string& context) const;

  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

 private:
  std::string source_ = "<inline>";
  std::map<std::string, std::string> entries_;
  mutable std::set<std::string> used_;
};

struct DeviceConfig {
  DeviceParams params;
  double bias = kReferenceBias;  // operating point Theta, flux quanta
};

/// Device file keys (frequencies in GHz, couplings and anharmonicities in
/// MHz, coherence times in microseconds, flux in flux quanta).
DeviceConfig parse_device_config(const KeyValueTable& table);
DeviceConfig load_device_config(const std::filesystem::path& path);
std::string format_device_config(const DeviceConfig& config);

}  // namespace tbus
