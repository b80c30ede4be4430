/*
 Copyright 2026 The hmts Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// Command-line front end: derives the modcod table and runs the region,
// sweep, beam and plan analyses, writing plot-ready CSV.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "hmts/hmts.hpp"

namespace fs = std::filesystem;
using namespace hmts;

namespace {

constexpr const char* kOutputDirEnv = "HMTS_OUTPUT_DIR";

struct GlobalOptions {
  std::string scenario_path;
  std::string references_path;
  std::string table_path;
  std::vector<double> alphas;
  double pilot_offset_db = 0.0;
  int nodes = 0;
  std::string output_dir;
};

/// Writes each named CSV either into the output directory or, when there is
/// none, to stdout one after the other.
class Sink {
 public:
  explicit Sink(std::optional<fs::path> dir) : dir_(std::move(dir)) {
    if (dir_) fs::create_directories(*dir_);
  }

  void emit(const std::string& name, const std::function<void(std::ostream&)>& writer) {
    if (!dir_) {
      writer(std::cout);
      return;
    }
    const fs::path path = *dir_ / name;
    std::ofstream out(path);
    if (!out) throw ConfigurationError(fmt::format("cannot write '{}'", path.string()));
    writer(out);
    std::cerr << "wrote " << path.string() << '\n';
  }

  bool to_files() const { return dir_.has_value(); }

 private:
  std::optional<fs::path> dir_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Broadcast planning with time sharing and hierarchical modulation"};
  app.require_subcommand(1);

  GlobalOptions g;
  auto* opt_scenario = app.add_option("--scenario", g.scenario_path, "JSON scenario file")->check(CLI::ExistingFile);
  auto* opt_refs = app.add_option("--references", g.references_path, "QPSK reference CSV (coding_rate,qpsk_es_n0_db)")
                       ->check(CLI::ExistingFile);
  auto* opt_table = app.add_option("--table", g.table_path, "prebuilt modcod table CSV")->check(CLI::ExistingFile);
  auto* opt_alphas = app.add_option("--alphas", g.alphas, "constellation parameters to include")->delimiter(',');
  auto* opt_pilot = app.add_option("--pilot-offset", g.pilot_offset_db, "dB added to every threshold");
  auto* opt_nodes = app.add_option("--nodes", g.nodes, "Gauss-Hermite nodes per axis")->check(CLI::Range(16, 200));
  auto* opt_out = app.add_option("--output-dir", g.output_dir, fmt::format("output directory (env {})", kOutputDirEnv));

  auto* thresholds = app.add_subcommand("thresholds", "derive and emit the modcod table");
  bool emit_references = false;
  bool reconstruct = false;
  thresholds->add_flag("--emit-references", emit_references, "also emit the reference CSV in use");
  thresholds->add_flag("--reconstruct", reconstruct,
                       "rebuild the references from the published hierarchical thresholds and report anomalies");

  auto* region = app.add_subcommand("region", "rate region of one receiver pair");
  double snr1 = 0.0, snr2 = 0.0;
  auto* opt_snr1 = region->add_option("--snr1", snr1, "receiver 1 Es/N0 [dB]");
  auto* opt_snr2 = region->add_option("--snr2", snr2, "receiver 2 Es/N0 [dB]");

  auto* sweep = app.add_subcommand("sweep", "hierarchical/classical rate ratio over an SNR grid");
  SweepSettings sweep_cli;
  unsigned threads = 0;
  auto* opt_min = sweep->add_option("--min", sweep_cli.min_db, "grid start [dB]");
  auto* opt_max = sweep->add_option("--max", sweep_cli.max_db, "grid end [dB]");
  auto* opt_step = sweep->add_option("--step", sweep_cli.step_db, "grid step [dB]");
  sweep->add_option("--threads", threads, "worker threads (0 = all cores)");

  auto* beam = app.add_subcommand("beam", "six-receiver spot beam: classical vs every pairing");
  BeamModel beam_cli;
  auto* opt_smax = beam->add_option("--snr-max", beam_cli.snr_max_db, "SNR at beam centre [dB]");
  auto* opt_delta = beam->add_option("--delta", beam_cli.delta_db, "attenuation step [dB]");

  auto* plan = app.add_subcommand("plan", "best pairing and schedule for the scenario's receivers");
  std::vector<double> plan_snrs;
  std::string search_mode;
  plan->add_option("--snrs", plan_snrs, "receiver SNRs [dB] (overrides the scenario)")->delimiter(',');
  plan->add_option("--search", search_mode, "auto | exhaustive | heuristic");

  auto* capacity = app.add_subcommand("capacity", "constellation-constrained capacity curves");
  double cap_alpha = 1.0, cap_min = -10.0, cap_max = 20.0, cap_step = 0.5;
  bool cap_qpsk = false;
  capacity->add_option("--alpha", cap_alpha, "hierarchical 16-QAM parameter");
  capacity->add_flag("--qpsk", cap_qpsk, "QPSK instead of the hierarchical 16-QAM");
  capacity->add_option("--min", cap_min, "Es/N0 start [dB]");
  capacity->add_option("--max", cap_max, "Es/N0 end [dB]");
  capacity->add_option("--step", cap_step, "Es/N0 step [dB]");

  auto* constellation = app.add_subcommand("constellation", "points and labels of a constellation");
  double con_alpha = 1.0;
  constellation->add_option("--alpha", con_alpha, "hierarchical 16-QAM parameter");

  CLI11_PARSE(app, argc, argv);

  try {
    Scenario sc;
    if (*opt_scenario) sc = load_scenario(g.scenario_path);
    if (*opt_refs) sc.references_path = g.references_path;
    if (*opt_table) sc.table_path = g.table_path;
    if (*opt_alphas) sc.alphas = g.alphas;
    if (*opt_pilot) sc.pilot_offset_db = g.pilot_offset_db;
    if (*opt_nodes) sc.integration.nodes_per_axis = g.nodes;
    if (*opt_out) {
      sc.output_dir = g.output_dir;
    } else if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
      sc.output_dir = env;
    }
    if (*opt_snr1 || *opt_snr2) {
      if (!(*opt_snr1 && *opt_snr2)) throw ConfigurationError("region needs both --snr1 and --snr2");
      sc.region = std::make_pair(snr1, snr2);
    }
    if (*opt_min) sc.sweep.min_db = sweep_cli.min_db;
    if (*opt_max) sc.sweep.max_db = sweep_cli.max_db;
    if (*opt_step) sc.sweep.step_db = sweep_cli.step_db;
    if (*opt_smax || *opt_delta) {
      if (!(*opt_smax && *opt_delta)) throw ConfigurationError("beam needs both --snr-max and --delta");
      sc.beam = beam_cli;
      sc.receivers.reset();
    }
    if (!plan_snrs.empty()) {
      std::vector<Receiver> rs;
      for (std::size_t i = 0; i < plan_snrs.size(); ++i) rs.push_back({fmt::format("rec{}", i + 1), plan_snrs[i]});
      sc.receivers = std::move(rs);
      sc.beam.reset();
    }
    if (!search_mode.empty()) sc.search = detail::parse_search_mode(search_mode);
    sc.validate();

    Sink sink(sc.output_dir ? std::optional<fs::path>(*sc.output_dir) : std::nullopt);

    if (*constellation) {
      const auto c = build_hierarchical_16qam(con_alpha);
      sink.emit("constellation.csv", [&](std::ostream& os) { write_csv(os, c); });
      return 0;
    }
    if (*capacity) {
      const auto c = cap_qpsk ? build_reference(ModulationId::kQpsk) : build_hierarchical_16qam(cap_alpha);
      const auto grid = sweep_axis({cap_min, cap_max, cap_step});
      const auto rows = capacity_curve(c, grid, sc.integration);
      sink.emit("capacity.csv", [&](std::ostream& os) { write_capacity_csv(os, rows); });
      return 0;
    }
    if (*thresholds && reconstruct) {
      const auto cells = published_hierarchical_thresholds();
      const auto res = reconstruct_references(cells, sc.integration);
      sink.emit("references.csv", [&](std::ostream& os) { write_references_csv(os, res.references); });
      sink.emit("anomalies.csv", [&](std::ostream& os) {
        os << "coding_rate,alpha,stream,published_db,implied_db,deviation_db\n";
        for (const auto& a : res.anomalies) {
          os << fmt::format("{},{},{},{},{:.3f},{:.3f}\n", a.cell.coding_rate.to_string(), a.cell.alpha,
                            to_string(a.cell.stream), a.cell.threshold_db, a.implied_threshold_db, a.deviation_db);
        }
      });
      return 0;
    }

    const ModCodTable table = scenario_table(sc);

    if (*thresholds) {
      sink.emit("modcod_table.csv", [&](std::ostream& os) { write_table_csv(os, table); });
      if (emit_references) {
        const auto refs = sc.references_path ? load_references(*sc.references_path) : shipped_references();
        sink.emit("references.csv", [&](std::ostream& os) { write_references_csv(os, refs); });
      }
    } else if (*region) {
      if (!sc.region) throw ConfigurationError("region needs --snr1/--snr2 or a 'region' block in the scenario");
      const auto rep = run_region(sc.region->first, sc.region->second, table);
      sink.emit("region.csv", [&](std::ostream& os) { write_region_csv(os, rep.region); });
      sink.emit("region_summary.csv", [&](std::ostream& os) { write_region_summary_csv(os, rep); });
    } else if (*sweep) {
      const auto res = run_sweep(sc.sweep, table, threads);
      sink.emit("sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, res); });
    } else if (*beam) {
      if (!sc.beam) throw ConfigurationError("beam needs --snr-max/--delta or a 'beam' block in the scenario");
      const auto rep = run_beam_comparison(*sc.beam, table);
      sink.emit("beam.csv", [&](std::ostream& os) { write_comparison_csv(os, rep); });
    } else if (*plan) {
      const auto receivers = scenario_receivers(sc);
      const auto summary = run_plan(receivers, table, sc.search);
      sink.emit("plan_summary.csv", [&](std::ostream& os) { write_plan_summary_csv(os, summary, receivers); });
      sink.emit("plan_schedule.csv", [&](std::ostream& os) { write_plan_csv(os, summary.choice.plan); });
      sink.emit("plan_receivers.csv", [&](std::ostream& os) { write_shares_csv(os, summary.choice.plan); });
    }
  } catch (const DegenerateReceiver& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
