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

// Command-line experiment runner.
//
//   tbus run <experiment> --device <file> --seed <u64> --out <dir> [--threads N]
//   tbus plot <kind> <files...>
//
// Exit status: 0 success, 1 configuration error, 2 numerical failure.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "experiments.hpp"
#include "plot.hpp"
#include "tbus/errors.hpp"
#include "tbus/parallel.hpp"

#ifndef TBUS_VERSION
#define TBUS_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using namespace tbus;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + p.string());
  out << content;
}

struct RunArgs {
  std::string kind;
  std::string device;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 0;
  std::string config;
  std::vector<std::string> sets;
  std::string calibration;
  std::string save_calibration;
};

int run(const RunArgs& a, const std::string& command_line) {
  const auto start = std::chrono::steady_clock::now();
  cli::RunContext ctx;
  ctx.device = load_device_config(a.device);
  if (!a.config.empty()) ctx.params = KeyValueTable::load(a.config);
  for (const auto& s : a.sets) ctx.params.set(s);
  ctx.seed = a.seed;
  if (!a.calibration.empty()) ctx.calibration_in = a.calibration;

  fs::path out = a.out;
  if (out.empty()) {
    const char* env = std::getenv("TBUS_OUT_DIR");
    out = env && *env ? fs::path(env) / a.kind : fs::path("results") / a.kind;
  }
  if (a.threads < 0) throw ConfigError("threads: must be non-negative");
  set_thread_count(a.threads);

  cli::Artifacts art = cli::run_experiment(a.kind, ctx);

  // Nothing touches the output directory until the experiment has finished.
  fs::create_directories(out);
  nlohmann::json files = nlohmann::json::array();
  for (const auto& [name, content] : art.files) {
    write_file(out / name, content);
    files.push_back(name);
  }
  if (!a.save_calibration.empty()) {
    if (art.calibrated.empty()) throw ConfigError("save-calibration: experiment calibrated no gate");
    save_calibrations(a.save_calibration, art.calibrated, ctx.device.params);
  }
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : ctx.params.entries()) params[k] = v;
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const nlohmann::json manifest = {
      {"schema_version", 1},
      {"tool_version", TBUS_VERSION},
      {"experiment", a.kind},
      {"command", command_line},
      {"device_file", a.device},
      {"device", format_device_config(ctx.device)},
      {"device_hash", config_hash(ctx.device.params)},
      {"parameters", params},
      {"seed", a.seed ? nlohmann::json(*a.seed) : nlohmann::json(nullptr)},
      {"threads", thread_count()},
      {"wall_time_s", wall},
      {"files", files},
      {"calibration_saved", a.save_calibration.empty() ? nlohmann::json(nullptr)
                                                       : nlohmann::json(a.save_calibration)}};
  write_file(out / "manifest.json", manifest.dump(2) + "\n");
  std::cout << art.summary.dump(2) << "\n" << "wrote " << files.size() + 1 << " files to " << out.string()
            << "\n";
  return 0;
}

int plot(const std::string& kind, const std::vector<std::string>& inputs, const std::string& output) {
  auto pick = [&](const std::string& ext) {
    for (const auto& f : inputs)
      if (fs::path(f).extension() == ext) return f;
    throw ConfigError("plot " + kind + ": needs a " + ext + " input");
  };
  std::string svg;
  const std::string csv_path = pick(".csv");
  const cli::CsvTable table = cli::CsvTable::parse(read_file(csv_path), csv_path);
  if (kind == "chevron") {
    std::optional<double> marker;
    for (const auto& f : inputs)
      if (fs::path(f).extension() == ".json") {
        const auto j = nlohmann::json::parse(read_file(f), nullptr, false);
        if (j.is_discarded()) throw ConfigError(f + ": invalid JSON");
        if (j.contains("resonance_offset_mhz")) marker = j["resonance_offset_mhz"].get<double>();
      }
    svg = cli::plot_chevron(table, marker);
  } else if (kind == "gate-scan") {
    svg = cli::plot_gate_scan(table);
  } else if (kind == "rb") {
    svg = cli::plot_decay(table, read_file(pick(".json")));
  } else if (kind == "ptm") {
    svg = cli::plot_ptm(table);
  } else {
    throw ConfigError("plot: unknown kind '" + kind + "' (chevron, gate-scan, rb, ptm)");
  }
  const fs::path dest = output.empty() ? fs::path(csv_path).replace_extension(".svg") : fs::path(output);
  write_file(dest, svg);
  std::cout << "wrote " << dest.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parametric tunable-bus two-qubit gate simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", TBUS_VERSION);

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "Run one experiment");
  run_cmd->add_option("experiment", ra.kind, "Experiment kind")
      ->required()
      ->check(CLI::IsMember(cli::experiment_kinds()));
  run_cmd->add_option("--device", ra.device, "Device config file")->required();
  run_cmd->add_option("--seed", ra.seed, "Master seed (required for stochastic experiments)");
  run_cmd->add_option("--out", ra.out, "Output directory (default $TBUS_OUT_DIR/<experiment>)");
  run_cmd->add_option("--threads", ra.threads, "Worker threads, 0 = all cores")->default_val(0);
  run_cmd->add_option("--config", ra.config, "Experiment parameter file (key = value)");
  run_cmd->add_option("--set", ra.sets, "Override one parameter, key=value (repeatable)");
  run_cmd->add_option("--calibration", ra.calibration, "Reuse gates from a calibration file");
  run_cmd->add_option("--save-calibration", ra.save_calibration,
                      "Write gates calibrated by this run to a file");

  std::string plot_kind, plot_out;
  std::vector<std::string> plot_files;
  auto* plot_cmd = app.add_subcommand("plot", "Render an SVG from result files");
  plot_cmd->add_option("kind", plot_kind, "chevron | gate-scan | rb | ptm")->required();
  plot_cmd->add_option("files", plot_files, "Result files (CSV plus JSON summary)")->required();
  plot_cmd->add_option("-o,--output", plot_out, "Output SVG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  std::string command_line;
  for (int i = 0; i < argc; ++i) command_line += (i ? " " : "") + std::string(argv[i]);
  try {
    if (*run_cmd) return run(ra, command_line);
    return plot(plot_kind, plot_files, plot_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error in " << e.what() << "\n";  // what() leads with the module
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
}
