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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tbus/calibration.hpp"
#include "tbus/config.hpp"

namespace tbus::cli {

struct RunContext {
  DeviceConfig device;
  KeyValueTable params;  // experiment file plus --set overrides
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> calibration_in;
};

struct Artifacts {
  std::vector<std::pair<std::string, std::string>> files;  // name, content
  nlohmann::json summary = nlohmann::json::object();
  std::vector<CalibratedGate> calibrated;  // candidates for --save-calibration

  void add(std::string name, std::string content) {
    files.emplace_back(std::move(name), std::move(content));
  }
};

const std::vector<std::string>& experiment_kinds();

/// Runs one experiment entirely in memory. Parameters are validated before
/// any simulation starts; ConfigError and NumericalError propagate.
Artifacts run_experiment(const std::string& kind, RunContext& context);

}  // namespace tbus::cli
