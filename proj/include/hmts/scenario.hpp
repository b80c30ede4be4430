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

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include "hmts/allocation.hpp"
#include "hmts/capacity.hpp"
#include "hmts/error.hpp"
#include "hmts/rate_region.hpp"
#include "hmts/thresholds.hpp"

namespace hmts {

inline constexpr int kScenarioVersion = 1;

struct BeamModel {
  double snr_max_db = 0.0;
  double delta_db = 0.0;
};

struct SweepSettings {
  double min_db = -4.0;
  double max_db = 16.0;
  double step_db = 0.25;
};

/// Everything a batch run needs. Either an explicit receiver list or a beam
/// model describes the receivers; never both.
struct Scenario {
  std::optional<std::vector<Receiver>> receivers;
  std::optional<BeamModel> beam;
  std::vector<double> alphas{kTableAlphas.begin(), kTableAlphas.end()};
  std::optional<std::string> references_path;
  std::optional<std::string> table_path;  // prebuilt modcod table; skips derivation
  double pilot_offset_db = 0.0;
  IntegrationSpec integration;
  std::optional<std::string> output_dir;
  std::optional<std::pair<double, double>> region;
  SweepSettings sweep;
  SearchMode search = SearchMode::kAuto;

  void validate() const {
    if (receivers && beam) throw ConfigurationError("scenario gives both receivers and a beam model");
    for (double a : alphas) {
      if (!(a > 0.0)) throw ConfigurationError(fmt::format("alpha must be > 0, got {}", a));
    }
    integration.validate();
  }
};

/// Receiver SNRs of the six-receiver spot beam: one at the edge of the
/// centre zone, two one ring out, three at the border.
inline std::vector<double> beam_snrs(double snr_max_db, double delta_db) {
  const double m = snr_max_db;
  const double d = delta_db;
  return {m - d, m - 2 * d, m - 2 * d, m - 3 * d, m - 3 * d, m - 3 * d};
}

inline std::vector<Receiver> beam_receivers(const BeamModel& beam) {
  std::vector<Receiver> out;
  const auto snrs = beam_snrs(beam.snr_max_db, beam.delta_db);
  for (std::size_t i = 0; i < snrs.size(); ++i) out.push_back({fmt::format("rec{}", i + 1), snrs[i]});
  return out;
}

inline std::vector<Receiver> scenario_receivers(const Scenario& s) {
  if (s.receivers) return *s.receivers;
  if (s.beam) return beam_receivers(*s.beam);
  throw ConfigurationError("scenario has neither receivers nor a beam model");
}

namespace detail {

inline SearchMode parse_search_mode(const std::string& s) {
  if (s == "auto") return SearchMode::kAuto;
  if (s == "exhaustive") return SearchMode::kExhaustive;
  if (s == "heuristic") return SearchMode::kHeuristic;
  throw ConfigurationError(fmt::format("unknown search mode '{}'", s));
}

}  // namespace detail

/// Parses the versioned JSON scenario format.
inline Scenario parse_scenario(const nlohmann::json& j) {
  using nlohmann::json;
  try {
    const int version = j.value("version", 0);
    if (version != kScenarioVersion) {
      throw ConfigurationError(fmt::format("unsupported scenario version {} (expected {})", version, kScenarioVersion));
    }
    Scenario s;
    if (j.contains("receivers")) {
      std::vector<Receiver> rs;
      std::size_t i = 0;
      for (const auto& r : j.at("receivers")) {
        ++i;
        Receiver rec;
        rec.id = r.value("id", fmt::format("rec{}", i));
        rec.snr_db = r.at("snr_db").get<double>();
        rs.push_back(std::move(rec));
      }
      s.receivers = std::move(rs);
    }
    if (j.contains("beam")) {
      const auto& b = j.at("beam");
      s.beam = BeamModel{b.at("snr_max_db").get<double>(), b.at("delta_db").get<double>()};
    }
    if (j.contains("alphas")) s.alphas = j.at("alphas").get<std::vector<double>>();
    if (j.contains("references")) s.references_path = j.at("references").get<std::string>();
    if (j.contains("table")) s.table_path = j.at("table").get<std::string>();
    s.pilot_offset_db = j.value("pilot_offset_db", 0.0);
    if (j.contains("integration")) {
      const auto& in = j.at("integration");
      const std::string method = in.value("method", std::string("gauss_hermite"));
      if (method == "gauss_hermite") {
        s.integration.method = IntegrationMethod::kGaussHermite;
      } else if (method == "monte_carlo") {
        s.integration.method = IntegrationMethod::kMonteCarlo;
      } else {
        throw ConfigurationError(fmt::format("unknown integration method '{}'", method));
      }
      s.integration.nodes_per_axis = in.value("nodes_per_axis", s.integration.nodes_per_axis);
      s.integration.sample_count = in.value("sample_count", s.integration.sample_count);
      s.integration.rng_seed = in.value("seed", s.integration.rng_seed);
    }
    if (j.contains("output_dir")) s.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("region")) {
      const auto& r = j.at("region");
      s.region = std::make_pair(r.at("snr1").get<double>(), r.at("snr2").get<double>());
    }
    if (j.contains("sweep")) {
      const auto& sw = j.at("sweep");
      s.sweep.min_db = sw.value("min", s.sweep.min_db);
      s.sweep.max_db = sw.value("max", s.sweep.max_db);
      s.sweep.step_db = sw.value("step", s.sweep.step_db);
    }
    if (j.contains("search")) s.search = detail::parse_search_mode(j.at("search").get<std::string>());
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ConfigurationError(fmt::format("malformed scenario: {}", e.what()));
  }
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError(fmt::format("cannot open scenario '{}'", path));
  try {
    return parse_scenario(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(fmt::format("{}: {}", path, e.what()));
  }
}

/// Loads the prebuilt table if one is named, otherwise derives it from the
/// reference points (file or shipped).
inline ModCodTable scenario_table(const Scenario& s) {
  if (s.table_path) return load_table(*s.table_path);
  const auto refs = s.references_path ? load_references(*s.references_path) : shipped_references();
  return build_modcod_table(s.alphas, refs, s.pilot_offset_db, s.integration);
}

// ---------------------------------------------------------------------------
// Two-receiver region

struct RegionReport {
  double snr1_db = 0.0;
  double snr2_db = 0.0;
  RateRegion region;             // classical + hierarchical points
  EqualRateSolution hierarchical;
  EqualRateSolution classical;

  /// R_hm / R_ts, NaN when the classical rate is zero.
  double ratio() const {
    if (classical.degenerate || !(classical.rate > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return hierarchical.rate / classical.rate;
  }
};

inline RegionReport run_region(double snr1_db, double snr2_db, const ModCodTable& table) {
  const double lo = std::min(snr1_db, snr2_db);
  const double hi = std::max(snr1_db, snr2_db);
  RegionReport rep;
  rep.snr1_db = snr1_db;
  rep.snr2_db = snr2_db;
  rep.region = upper_hull(achievable_points(lo, hi, table));
  rep.hierarchical = equal_rate_point(rep.region);
  rep.classical = equal_rate_point(upper_hull(classical_points(lo, hi, table)));
  return rep;
}

inline std::string describe_mix(const EqualRateSolution& sol) {
  std::vector<std::string> parts;
  for (const auto& c : sol.mix) parts.push_back(fmt::format("{}:{:.6f}", c.vertex.provenance(), c.weight));
  return fmt::format("{}", fmt::join(parts, " | "));
}

inline void write_region_summary_csv(std::ostream& os, const RegionReport& rep) {
  os << "snr1_db,snr2_db,classical_rate,hierarchical_rate,ratio,mix\n";
  const double ratio = rep.ratio();
  os << fmt::format("{},{},{},{},{},{}\n", rep.snr1_db, rep.snr2_db, rep.classical.rate, rep.hierarchical.rate,
                    std::isnan(ratio) ? std::string("NA") : fmt::format("{}", ratio), describe_mix(rep.hierarchical));
}

// ---------------------------------------------------------------------------
// SNR x SNR sweep

struct SweepResult {
  std::vector<double> axis;
  std::vector<double> ratio;  // row-major [i * n + j] for (axis[i], axis[j]); NaN = undecodable

  double at(std::size_t i, std::size_t j) const { return ratio[i * axis.size() + j]; }
};

inline std::vector<double> sweep_axis(const SweepSettings& s) {
  if (!(s.step_db > 0.0) || !std::isfinite(s.min_db) || !std::isfinite(s.max_db) || s.max_db < s.min_db) {
    throw ConfigurationError(
        fmt::format("empty sweep grid: min {} max {} step {}", s.min_db, s.max_db, s.step_db));
  }
  const auto n = static_cast<std::size_t>(std::floor((s.max_db - s.min_db) / s.step_db + 1e-9)) + 1;
  std::vector<double> axis(n);
  for (std::size_t i = 0; i < n; ++i) axis[i] = s.min_db + static_cast<double>(i) * s.step_db;
  return axis;
}

/// Ratio of hierarchical to classical equal rate for every SNR pair of the
/// grid. Rows are computed on `workers` threads (0 = hardware concurrency).
inline SweepResult run_sweep(const SweepSettings& settings, const ModCodTable& table, unsigned workers = 0) {
  SweepResult res;
  res.axis = sweep_axis(settings);
  const std::size_t n = res.axis.size();
  res.ratio.assign(n * n, std::numeric_limits<double>::quiet_NaN());

  auto cell = [&](std::size_t i, std::size_t j) {
    const double lo = std::min(res.axis[i], res.axis[j]);
    const double hi = std::max(res.axis[i], res.axis[j]);
    const auto ts = equal_rate_point(upper_hull(classical_points(lo, hi, table)));
    if (ts.degenerate || !(ts.rate > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const auto hm = equal_rate_point(upper_hull(achievable_points(lo, hi, table)));
    return hm.rate / ts.rate;
  };
  // Only the upper triangle is computed; the lower one is its mirror.
  auto run_rows = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < n; i += stride)
      for (std::size_t j = i; j < n; ++j) res.ratio[i * n + j] = cell(i, j);
  };
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    run_rows(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run_rows, w, workers);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) res.ratio[i * n + j] = res.ratio[j * n + i];
  return res;
}

/// Matrix CSV: first row is the receiver-2 SNR axis, first column the
/// receiver-1 SNR; undecodable cells are "NA".
inline void write_sweep_csv(std::ostream& os, const SweepResult& res) {
  os << "snr1_db\\snr2_db";
  for (double v : res.axis) os << fmt::format(",{}", v);
  os << '\n';
  for (std::size_t i = 0; i < res.axis.size(); ++i) {
    os << fmt::format("{}", res.axis[i]);
    for (std::size_t j = 0; j < res.axis.size(); ++j) {
      const double r = res.at(i, j);
      os << (std::isnan(r) ? std::string(",NA") : fmt::format(",{:.9f}", r));
    }
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// Multi-receiver comparisons

/// Gain of `hierarchical` over `classical` in percent.
inline double gain_percent(double hierarchical, double classical) {
  return 100.0 * (hierarchical - classical) / classical;
}

struct StrategyResult {
  Grouping grouping;
  std::string pair_snrs;  // e.g. "(4 8) (4 6) (4 6)"
  Plan plan;
  double gain_percent = 0.0;
  bool max_spread = false;
};

struct ComparisonReport {
  std::vector<Receiver> receivers;
  Plan classical;
  std::vector<StrategyResult> strategies;  // sorted by decreasing rate
  std::size_t best = 0;
};

inline std::string describe_pair_snrs(const Grouping& g, std::span<const Receiver> receivers) {
  const auto key = g.snr_key(receivers);
  std::vector<std::string> parts;
  for (std::size_t i = 0; i + 1 < key.size(); i += 2) parts.push_back(fmt::format("({} {})", key[i], key[i + 1]));
  if (key.size() % 2 == 1) parts.push_back(fmt::format("({})", key.back()));
  return fmt::format("{}", fmt::join(parts, " "));
}

/// Classical plan against every distinct pairing of `receivers`.
inline ComparisonReport run_comparison(std::span<const Receiver> receivers, const ModCodTable& table) {
  ComparisonReport rep;
  rep.receivers.assign(receivers.begin(), receivers.end());
  rep.classical = classical_plan(receivers, table);
  const auto spread_key = max_spread_grouping(receivers).snr_key(receivers);
  for (auto& g : enumerate_groupings(receivers)) {
    StrategyResult s;
    s.pair_snrs = describe_pair_snrs(g, receivers);
    s.plan = pair_plan(receivers, g, table);
    s.gain_percent = gain_percent(s.plan.rate, rep.classical.rate);
    s.max_spread = g.snr_key(receivers) == spread_key;
    s.grouping = std::move(g);
    rep.strategies.push_back(std::move(s));
  }
  const auto choice = best_grouping(receivers, table, SearchMode::kExhaustive);
  const auto best_key = choice.grouping.snr_key(receivers);
  std::stable_sort(rep.strategies.begin(), rep.strategies.end(),
                   [](const StrategyResult& a, const StrategyResult& b) { return a.plan.rate > b.plan.rate; });
  for (std::size_t i = 0; i < rep.strategies.size(); ++i) {
    if (rep.strategies[i].grouping.snr_key(receivers) == best_key) rep.best = i;
  }
  return rep;
}

inline ComparisonReport run_beam_comparison(const BeamModel& beam, const ModCodTable& table) {
  return run_comparison(beam_receivers(beam), table);
}

/// CSV "strategy,pair_snrs,rate,gain_percent,best,max_spread"; the classical
/// plan is the first row. Gains have one decimal.
inline void write_comparison_csv(std::ostream& os, const ComparisonReport& rep) {
  os << "strategy,pair_snrs,rate,gain_percent,best,max_spread\n";
  os << fmt::format("classical,,{},0.0,0,0\n", rep.classical.rate);
  for (std::size_t i = 0; i < rep.strategies.size(); ++i) {
    const auto& s = rep.strategies[i];
    os << fmt::format("hierarchical,{},{},{:.1f},{},{}\n", s.pair_snrs, s.plan.rate, s.gain_percent,
                      i == rep.best ? 1 : 0, s.max_spread ? 1 : 0);
  }
}

struct PlanSummary {
  Plan classical;
  GroupingChoice choice;
  double gain_percent = 0.0;
};

inline PlanSummary run_plan(std::span<const Receiver> receivers, const ModCodTable& table,
                            SearchMode mode = SearchMode::kAuto) {
  PlanSummary s;
  s.classical = classical_plan(receivers, table);
  s.choice = best_grouping(receivers, table, mode);
  s.gain_percent = gain_percent(s.choice.plan.rate, s.classical.rate);
  return s;
}

/// Summary record "rate,classical_rate,gain_percent,grouping,co_optimal".
inline void write_plan_summary_csv(std::ostream& os, const PlanSummary& s, std::span<const Receiver> receivers) {
  std::vector<std::string> co;
  for (const auto& g : s.choice.co_optimal) co.push_back(g.describe(receivers));
  os << "rate,classical_rate,gain_percent,grouping,co_optimal\n";
  os << fmt::format("{},{},{:.1f},{},{}\n", s.choice.plan.rate, s.classical.rate, s.gain_percent,
                    s.choice.grouping.describe(receivers), fmt::join(co, " | "));
}

/// Per-receiver CSV "id,snr_db,time_fraction,rate,average_rate".
inline void write_shares_csv(std::ostream& os, const Plan& plan) {
  os << "id,snr_db,time_fraction,rate,average_rate\n";
  for (const auto& r : plan.receivers) {
    os << fmt::format("{},{},{},{},{}\n", r.id, r.snr_db, r.time_fraction, r.rate, r.time_fraction * r.rate);
  }
}

}  // namespace hmts
