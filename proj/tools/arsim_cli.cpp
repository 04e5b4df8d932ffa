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

// arsim command-line front end.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "arsim/config.hpp"
#include "arsim/error.hpp"
#include "arsim/runner.hpp"

namespace {

using nlohmann::json;

struct Flags {
  std::string config_path;
  std::string scenario;
  std::string out;
  std::optional<int> threads;
  std::vector<int> fock_dims;
  std::optional<double> tol;
  std::vector<std::string> overrides;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_path, "JSON scenario configuration")->check(CLI::ExistingFile);
  cmd->add_option("--scenario", f.scenario, "scenario name (overrides the config)");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--threads", f.threads, "worker threads for grid points")->check(CLI::PositiveNumber);
  cmd->add_option("--fock-dim", f.fock_dims, "Fock dimension per mode (a, b, c)")->delimiter(',');
  cmd->add_option("--tol", f.tol, "integrator relative tolerance");
  cmd->add_option("--set", f.overrides, "override a config key, e.g. physics.g_hz=5000");
}

arsim::ScenarioConfig resolve(const Flags& f) {
  json user = json::object();
  if (!f.config_path.empty()) {
    std::ifstream is(f.config_path);
    try {
      user = json::parse(is);
    } catch (const json::exception& e) {
      throw arsim::Error(arsim::ErrorCode::Config, f.config_path + ": " + e.what());
    }
  }
  if (!f.scenario.empty()) user["scenario"] = f.scenario;
  const bool config_threads = user.contains("numerics") && user["numerics"].contains("threads");
  json merged = arsim::merged_config(user);
  for (const auto& o : f.overrides) arsim::apply_override(merged, o);
  if (!f.fock_dims.empty()) merged["numerics"]["fock_dims"] = f.fock_dims;
  if (f.tol) merged["numerics"]["tol"] = *f.tol;
  if (!f.out.empty()) merged["output"]["dir"] = f.out;
  if (f.threads) {
    merged["numerics"]["threads"] = *f.threads;
  } else if (!config_threads) {
    if (const char* env = std::getenv("ARSIM_THREADS")) {
      try {
        merged["numerics"]["threads"] = std::stoi(env);
      } catch (const std::exception&) {
        throw arsim::Error(arsim::ErrorCode::Config, "ARSIM_THREADS is not an integer");
      }
    }
  }
  arsim::ScenarioConfig cfg = arsim::ScenarioConfig::from_json(merged);
  cfg.validate();
  return cfg;
}

int execute(const arsim::ScenarioConfig& cfg, bool require_grid) {
  if (require_grid && (cfg.sweep.parameter.empty() || cfg.sweep.grid.empty())) {
    throw arsim::Error(arsim::ErrorCode::Config, "sweep needs sweep.parameter and a nonempty sweep.grid");
  }
  const arsim::ResultTable table = arsim::run_scenario(cfg);
  arsim::write_outputs(table, cfg, cfg.output.dir);
  std::cout << cfg.scenario << ": " << table.rows.size() << " rows, " << table.failures.size() << " failed, "
            << table.wall_time_s << " s -> " << cfg.output.dir << "\n";
  for (const auto& f : table.failures) std::cerr << "failed: " << f << "\n";
  return table.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"arsim: adiabatic Rabi-probe simulator"};
  app.require_subcommand(1);
  Flags run_flags, sweep_flags, validate_flags;
  auto* run = app.add_subcommand("run", "run a scenario");
  add_flags(run, run_flags);
  auto* sweep = app.add_subcommand("sweep", "run a scenario over its sweep grid");
  add_flags(sweep, sweep_flags);
  auto* list = app.add_subcommand("list-scenarios", "list the scenario registry");
  auto* validate = app.add_subcommand("validate-config", "check a configuration and print it resolved");
  add_flags(validate, validate_flags);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*list) {
      for (const auto& s : arsim::scenarios()) std::cout << s.name << "\t" << s.description << "\n";
      return 0;
    }
    if (*validate) {
      const auto cfg = resolve(validate_flags);
      std::cout << cfg.to_json().dump(2) << "\n# config_hash: " << cfg.hash() << "\n";
      return 0;
    }
    if (*run) return execute(resolve(run_flags), false);
    if (*sweep) return execute(resolve(sweep_flags), true);
  } catch (const arsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
