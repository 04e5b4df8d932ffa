// Copyright 2026 The arsim Authors
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

// Scenario registry and sweep orchestration. Every grid point runs its
// physics single-threaded; points are farmed out to a worker pool and the
// results are collected in grid order.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "arsim/config.hpp"

namespace arsim {

inline constexpr const char* kToolVersion = "0.1.0";

struct ScenarioInfo {
  std::string name;
  std::string description;
};

const std::vector<ScenarioInfo>& scenarios();
bool is_scenario(const std::string& name);

struct ResultTable {
  std::string scenario;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  // One entry per failed grid point: "<parameter>=<value>: <reason>".
  std::vector<std::string> failures;
  std::string units;
  std::string config_hash;
  std::string tool_version = kToolVersion;
  double wall_time_s = 0.0;

  bool ok() const { return failures.empty(); }
  size_t column(const std::string& name) const;
  std::vector<double> column_values(const std::string& name) const;
  // CSV with '#' metadata lines; the bytes depend only on the results
  // and the configuration hash.
  void write_csv(std::ostream& os) const;
  std::string csv() const;
};

// Grid points run on cfg.numerics.threads workers.
ResultTable run_scenario(const ScenarioConfig& cfg);
// Same with an explicit worker budget; Config error on an empty grid.
ResultTable sweep(const ScenarioConfig& cfg, int worker_budget);

// Writes <dir>/<scenario>.csv and <dir>/run_manifest.json.
void write_outputs(const ResultTable& table, const ScenarioConfig& cfg, const std::filesystem::path& dir);

}  // namespace arsim
