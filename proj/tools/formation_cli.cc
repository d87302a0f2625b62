// Copyright 2026 The Formation Maneuvering Authors
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

// Command-line front end: run, preset, check and batch.

#include <algorithm>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "formation/diagnostics.h"
#include "formation/errors.h"
#include "formation/scenario.h"

namespace {

using formation::ScenarioConfig;

// Loads a config, mapping failures to exit codes. Returns the code on error.
std::optional<int> load(const std::string& path, ScenarioConfig& out,
                        std::ostream& err) {
  try {
    out = formation::load_scenario(path);
    return std::nullopt;
  } catch (const formation::ParseError& e) {
    err << path << ": ParseError: " << e.what() << "\n";
  } catch (const formation::SchemaError& e) {
    err << path << ": SchemaError: " << e.what() << "\n";
  } catch (const formation::ValidationError& e) {
    err << path << ": ValidationError: " << e.what() << "\n";
  } catch (const std::ios_base::failure& e) {
    err << path << ": I/O error: " << e.what() << "\n";
    return formation::kExitIoError;
  } catch (const formation::FormationError& e) {
    err << path << ": " << e.what() << "\n";
  }
  return formation::kExitConfigError;
}

struct RunOptions {
  std::string config;
  std::string trace;
  std::string metrics;
  std::optional<double> dt;
  std::optional<double> t_final;
  std::optional<double> threshold;
};

int run(const RunOptions& opt) {
  ScenarioConfig config;
  if (auto code = load(opt.config, config, std::cerr)) return *code;
  if (opt.dt) config.dt = *opt.dt;
  if (opt.t_final) config.t_final = *opt.t_final;
  if (opt.threshold) config.threshold = *opt.threshold;
  return formation::run_scenario(config, opt.trace, opt.metrics, std::cerr);
}

int emit_preset(const std::string& name) {
  ScenarioConfig config;
  try {
    config = formation::preset(name);
  } catch (const std::out_of_range&) {
    std::cerr << "unknown preset '" << name << "'; available:";
    for (const std::string& p : formation::preset_names()) std::cerr << " " << p;
    std::cerr << "\n";
    return formation::kExitConfigError;
  }
  std::cout << formation::serialize_scenario(config) << "\n";
  return std::cout.flush() ? formation::kExitOk : formation::kExitIoError;
}

int check(const std::string& path) {
  ScenarioConfig config;
  if (auto code = load(path, config, std::cerr)) return *code;
  std::vector<formation::CheckResult> results;
  try {
    results = formation::run_checks(config);
  } catch (const formation::DivergenceError& e) {
    std::cerr << "DivergenceError at t = " << e.time() << ": " << e.what() << "\n";
    return formation::kExitRuntimeError;
  } catch (const formation::FormationError& e) {
    std::cerr << e.what() << "\n";
    return formation::kExitRuntimeError;
  }
  formation::print_checks(results, std::cout);
  const bool ok = std::all_of(results.begin(), results.end(),
                              [](const auto& r) { return r.passed; });
  return ok ? formation::kExitOk : formation::kExitCheckFailed;
}

// Runs each config on its own engine. Outputs land in out_dir as
// <stem>.csv and <stem>.metrics.json. Returns the largest exit code.
int batch(const std::vector<std::string>& configs, const std::string& out_dir,
          unsigned jobs) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << out_dir << ": I/O error: " << ec.message() << "\n";
    return formation::kExitIoError;
  }
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());

  struct Outcome {
    int code = 0;
    std::string log;
  };
  auto one = [&](const std::string& path) {
    Outcome out;
    std::ostringstream log;
    ScenarioConfig config;
    if (auto code = load(path, config, log)) {
      out.code = *code;
    } else {
      const auto stem = (std::filesystem::path(out_dir) /
                         std::filesystem::path(path).stem()).string();
      out.code = formation::run_scenario(config, stem + ".csv",
                                         stem + ".metrics.json", log);
    }
    out.log = log.str();
    return out;
  };

  int worst = formation::kExitOk;
  for (std::size_t begin = 0; begin < configs.size(); begin += jobs) {
    const std::size_t end = std::min(configs.size(), begin + jobs);
    std::vector<std::future<Outcome>> pending;
    for (std::size_t k = begin; k < end; ++k) {
      pending.push_back(std::async(std::launch::async, one, configs[k]));
    }
    for (std::size_t k = begin; k < end; ++k) {
      const Outcome o = pending[k - begin].get();
      std::cerr << o.log;
      std::cout << configs[k] << ": exit " << o.code << "\n";
      worst = std::max(worst, o.code);
    }
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Leader-follower formation maneuvering simulator"};
  app.require_subcommand(1);

  RunOptions run_opt;
  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario; write trace and metrics");
  run_cmd->add_option("--config", run_opt.config, "Scenario file")->required();
  run_cmd->add_option("--trace", run_opt.trace, "Trace CSV output")->required();
  run_cmd->add_option("--metrics", run_opt.metrics, "Metrics JSON output")->required();
  run_cmd->add_option("--dt", run_opt.dt, "Integration step override");
  run_cmd->add_option("--t-final", run_opt.t_final, "Final time override");
  run_cmd->add_option("--threshold", run_opt.threshold, "Convergence threshold");

  std::string preset_name;
  auto* preset_cmd = app.add_subcommand("preset", "Print a built-in scenario");
  preset_cmd->add_option("name", preset_name, "Preset name")->required();

  std::string check_config;
  auto* check_cmd = app.add_subcommand("check", "Run the diagnostic suite on a scenario");
  check_cmd->add_option("--config", check_config, "Scenario file")->required();

  std::vector<std::string> batch_configs;
  std::string batch_dir = ".";
  unsigned batch_jobs = 0;
  auto* batch_cmd = app.add_subcommand("batch", "Run several scenarios concurrently");
  batch_cmd->add_option("--config", batch_configs, "Scenario files")->required();
  batch_cmd->add_option("--out-dir", batch_dir, "Output directory");
  batch_cmd->add_option("--jobs", batch_jobs, "Concurrent engines (0: hardware threads)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return formation::kExitConfigError;
  }

  if (*run_cmd) return run(run_opt);
  if (*preset_cmd) return emit_preset(preset_name);
  if (*check_cmd) return check(check_config);
  return batch(batch_configs, batch_dir, batch_jobs);
}
