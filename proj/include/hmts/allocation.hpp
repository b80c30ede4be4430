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
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "hmts/error.hpp"
#include "hmts/rate_region.hpp"
#include "hmts/thresholds.hpp"

namespace hmts {

struct Receiver {
  std::string id;
  double snr_db = 0.0;
  // Multiplier on the receiver's target rate. Only the equal-rate policy
  // (every weight 1) is supported by the planners.
  double rate_weight = 1.0;
};

namespace detail {

inline void require_positive_rates(std::span<const double> rates) {
  if (rates.empty()) throw InvalidParameter("rate list is empty");
  std::vector<std::string> bad;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (!(rates[i] > 0.0) || !std::isfinite(rates[i])) bad.push_back(std::to_string(i));
  }
  if (!bad.empty()) {
    throw DegenerateReceiver(bad, fmt::format("non-positive rate at index {}", fmt::join(bad, ", ")));
  }
}

inline void require_equal_rate_policy(std::span<const Receiver> receivers) {
  for (const auto& r : receivers) {
    if (r.rate_weight != 1.0) {
      throw InvalidParameter(fmt::format("receiver {}: only the equal-rate policy is supported", r.id));
    }
    if (!std::isfinite(r.snr_db)) throw InvalidParameter(fmt::format("receiver {}: SNR is not finite", r.id));
  }
}

}  // namespace detail

/// Time fractions giving every receiver the same average rate t_i R_i,
/// with sum t_i = 1. Computed as t_i proportional to 1 / R_i.
inline std::vector<double> time_fractions(std::span<const double> rates) {
  detail::require_positive_rates(rates);
  double inverse_sum = 0.0;
  for (double r : rates) inverse_sum += 1.0 / r;
  std::vector<double> t;
  t.reserve(rates.size());
  for (double r : rates) t.push_back((1.0 / r) / inverse_sum);
  return t;
}

/// Common average rate under equal-rate time sharing: (sum 1 / R_i)^-1.
inline double equal_rate(std::span<const double> rates) {
  detail::require_positive_rates(rates);
  double inverse_sum = 0.0;
  for (double r : rates) inverse_sum += 1.0 / r;
  return 1.0 / inverse_sum;
}

/// Receivers sharing a hierarchical modulation two by two. Indices refer to
/// the receiver list the grouping was built for; at most one receiver is
/// left alone (odd counts) and served classically.
struct Grouping {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::optional<std::size_t> singleton;

  /// Sorted (low, high) SNR per pair, then the singleton SNR if any.
  std::vector<double> snr_key(std::span<const Receiver> receivers) const {
    std::vector<std::pair<double, double>> ps;
    for (auto [a, b] : pairs) {
      ps.emplace_back(std::min(receivers[a].snr_db, receivers[b].snr_db),
                      std::max(receivers[a].snr_db, receivers[b].snr_db));
    }
    std::sort(ps.begin(), ps.end());
    std::vector<double> key;
    for (auto [lo, hi] : ps) {
      key.push_back(lo);
      key.push_back(hi);
    }
    if (singleton) key.push_back(receivers[*singleton].snr_db);
    return key;
  }

  double total_snr_spread(std::span<const Receiver> receivers) const {
    double s = 0.0;
    for (auto [a, b] : pairs) s += std::abs(receivers[a].snr_db - receivers[b].snr_db);
    return s;
  }

  std::string describe(std::span<const Receiver> receivers) const {
    std::vector<std::string> parts;
    for (auto [a, b] : pairs) parts.push_back(fmt::format("({} {})", receivers[a].id, receivers[b].id));
    if (singleton) parts.push_back(fmt::format("({})", receivers[*singleton].id));
    return fmt::format("{}", fmt::join(parts, " "));
  }
};

struct ReceiverShare {
  std::string id;
  double snr_db = 0.0;
  double time_fraction = 0.0;
  double rate = 0.0;  // rate per unit of own time; t * rate is the average rate
};

/// One operating point of the broadcast schedule.
struct ScheduleEntry {
  std::vector<std::string> receivers;  // lower SNR first for pairs
  RatePoint operating_point;
  double time_fraction = 0.0;
};

struct Plan {
  std::vector<ReceiverShare> receivers;
  double rate = 0.0;  // common average rate, bits/symbol
  std::vector<ScheduleEntry> schedule;
};

/// Time sharing without hierarchical modulation: each receiver gets its best
/// single modcod for a fraction of time inversely proportional to its rate.
inline Plan classical_plan(std::span<const Receiver> receivers, const ModCodTable& table) {
  detail::require_equal_rate_policy(receivers);
  if (receivers.empty()) throw InvalidParameter("no receivers");
  std::vector<ModCod> modcods;
  std::vector<std::string> undecodable;
  for (const auto& r : receivers) {
    auto m = best_single_modcod(r.snr_db, table);
    if (!m) {
      undecodable.push_back(r.id);
      continue;
    }
    modcods.push_back(*m);
  }
  if (!undecodable.empty()) {
    throw DegenerateReceiver(undecodable, fmt::format("receivers decode no modcod: {}", fmt::join(undecodable, ", ")));
  }
  std::vector<double> rates;
  for (const auto& m : modcods) rates.push_back(m.spectral_rate);
  const auto t = time_fractions(rates);

  Plan plan;
  plan.rate = equal_rate(rates);
  for (std::size_t i = 0; i < receivers.size(); ++i) {
    plan.receivers.push_back({receivers[i].id, receivers[i].snr_db, t[i], rates[i]});
    RatePoint p{rates[i], 0.0, PointKind::kSingleFirst, modcods[i], std::nullopt};
    plan.schedule.push_back({{receivers[i].id}, p, t[i]});
  }
  return plan;
}

/// Time sharing over receiver pairs, each pair running its equal-rate mix of
/// hierarchical and classical modcods.
///
/// Both members of a pair receive R_pair during the whole of the pair's air
/// time, so each is accounted with rate 2 R_pair against its own share t;
/// the pair occupies 2t and splits it over its mix weights.
inline Plan pair_plan(std::span<const Receiver> receivers, const Grouping& grouping, const ModCodTable& table) {
  detail::require_equal_rate_policy(receivers);
  std::vector<int> seen(receivers.size(), 0);
  for (auto [a, b] : grouping.pairs) {
    if (a >= receivers.size() || b >= receivers.size() || a == b) throw InvalidParameter("bad receiver pair");
    ++seen[a];
    ++seen[b];
  }
  if (grouping.singleton) {
    if (*grouping.singleton >= receivers.size()) throw InvalidParameter("bad singleton index");
    ++seen[*grouping.singleton];
  }
  if (std::any_of(seen.begin(), seen.end(), [](int n) { return n != 1; })) {
    throw InvalidParameter("grouping must cover every receiver exactly once");
  }

  struct Unit {
    std::vector<std::size_t> members;  // lower SNR first
    EqualRateSolution solution;
    double member_rate = 0.0;
  };
  std::vector<Unit> units;
  std::vector<std::string> degenerate;
  for (auto [a, b] : grouping.pairs) {
    if (receivers[a].snr_db > receivers[b].snr_db) std::swap(a, b);
    Unit u{{a, b}, pair_equal_rate(receivers[a].snr_db, receivers[b].snr_db, table), 0.0};
    if (u.solution.degenerate || !(u.solution.rate > 0.0)) {
      degenerate.push_back(receivers[a].id);
      degenerate.push_back(receivers[b].id);
    }
    u.member_rate = 2.0 * u.solution.rate;
    units.push_back(std::move(u));
  }
  if (grouping.singleton) {
    const std::size_t s = *grouping.singleton;
    Unit u{{s}, {}, 0.0};
    if (auto m = best_single_modcod(receivers[s].snr_db, table)) {
      RatePoint p{m->spectral_rate, 0.0, PointKind::kSingleFirst, *m, std::nullopt};
      u.solution = {m->spectral_rate, {{p, 1.0}}, false};
      u.member_rate = m->spectral_rate;
    } else {
      degenerate.push_back(receivers[s].id);
    }
    units.push_back(std::move(u));
  }
  if (!degenerate.empty()) {
    throw DegenerateReceiver(degenerate,
                             fmt::format("no positive equal rate for receivers {}", fmt::join(degenerate, ", ")));
  }

  std::vector<double> rates(receivers.size(), 0.0);
  for (const auto& u : units)
    for (std::size_t m : u.members) rates[m] = u.member_rate;
  const auto t = time_fractions(rates);

  Plan plan;
  plan.rate = equal_rate(rates);
  for (std::size_t i = 0; i < receivers.size(); ++i) {
    plan.receivers.push_back({receivers[i].id, receivers[i].snr_db, t[i], rates[i]});
  }
  for (const auto& u : units) {
    double unit_time = 0.0;
    std::vector<std::string> ids;
    for (std::size_t m : u.members) {
      unit_time += t[m];
      ids.push_back(receivers[m].id);
    }
    for (const auto& c : u.solution.mix) {
      if (c.weight <= 0.0) continue;
      plan.schedule.push_back({ids, c.vertex, unit_time * c.weight});
    }
  }
  return plan;
}

/// All pairings of `receivers` (perfect matchings, plus the choice of the
/// singleton for odd counts), keeping one grouping per distinct multiset of
/// per-pair SNRs.
inline std::vector<Grouping> enumerate_groupings(std::span<const Receiver> receivers, std::size_t max_receivers = 12) {
  const std::size_t n = receivers.size();
  if (n > max_receivers) {
    throw SizeError(fmt::format("exhaustive pairing limited to {} receivers, got {}", max_receivers, n));
  }
  std::vector<Grouping> out;
  if (n == 0) return out;
  std::set<std::vector<double>> keys;
  std::vector<bool> used(n, false);
  Grouping current;

  auto recurse = [&](auto&& self) -> void {
    std::size_t i = 0;
    while (i < n && used[i]) ++i;
    if (i == n) {
      if (keys.insert(current.snr_key(receivers)).second) out.push_back(current);
      return;
    }
    used[i] = true;
    if (n % 2 == 1 && !current.singleton) {
      current.singleton = i;
      self(self);
      current.singleton.reset();
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      if (used[j]) continue;
      used[j] = true;
      current.pairs.emplace_back(i, j);
      self(self);
      current.pairs.pop_back();
      used[j] = false;
    }
    used[i] = false;
  };
  recurse(recurse);
  return out;
}

/// Pairs rank i with rank i + n/2 after sorting by SNR. With an odd count the
/// median receiver is left alone.
inline Grouping max_spread_grouping(std::span<const Receiver> receivers) {
  std::vector<std::size_t> order(receivers.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return receivers[a].snr_db < receivers[b].snr_db; });
  Grouping g;
  if (order.size() % 2 == 1) {
    const auto mid = order.begin() + static_cast<std::ptrdiff_t>(order.size() / 2);
    g.singleton = *mid;
    order.erase(mid);
  }
  const std::size_t half = order.size() / 2;
  for (std::size_t i = 0; i < half; ++i) g.pairs.emplace_back(order[i], order[i + half]);
  return g;
}

enum class SearchMode { kAuto, kExhaustive, kHeuristic };

struct GroupingChoice {
  Grouping grouping;
  Plan plan;
  std::vector<Grouping> co_optimal;  // every grouping reaching the best rate, canonical one first
  bool heuristic = false;
};

/// Grouping with the largest common rate. Ties go to the larger total SNR
/// spread inside pairs, then to the lexicographically smallest SNR key.
/// kAuto searches exhaustively up to 12 receivers and uses the max-spread
/// heuristic above that.
inline GroupingChoice best_grouping(std::span<const Receiver> receivers, const ModCodTable& table,
                                    SearchMode mode = SearchMode::kAuto) {
  constexpr std::size_t kExhaustiveLimit = 12;
  constexpr double kTieTolerance = 1e-12;
  if (receivers.empty()) throw InvalidParameter("no receivers");
  const bool heuristic =
      mode == SearchMode::kHeuristic || (mode == SearchMode::kAuto && receivers.size() > kExhaustiveLimit);
  if (heuristic) {
    Grouping g = max_spread_grouping(receivers);
    Plan p = pair_plan(receivers, g, table);
    return {g, std::move(p), {g}, true};
  }

  struct Candidate {
    Grouping grouping;
    Plan plan;
    double spread;
    std::vector<double> key;
  };
  std::vector<Candidate> candidates;
  std::optional<DegenerateReceiver> first_error;
  for (auto& g : enumerate_groupings(receivers, kExhaustiveLimit)) {
    try {
      Plan p = pair_plan(receivers, g, table);
      const double spread = g.total_snr_spread(receivers);
      auto key = g.snr_key(receivers);
      candidates.push_back({std::move(g), std::move(p), spread, std::move(key)});
    } catch (const DegenerateReceiver& e) {
      if (!first_error) first_error = e;
    }
  }
  if (candidates.empty()) {
    if (first_error) throw *first_error;
    throw InvalidParameter("no grouping available");
  }
  auto better = [&](const Candidate& a, const Candidate& b) {
    const double tol = kTieTolerance * std::max(a.plan.rate, b.plan.rate);
    if (std::abs(a.plan.rate - b.plan.rate) > tol) return a.plan.rate > b.plan.rate;
    if (a.spread != b.spread) return a.spread > b.spread;
    return a.key < b.key;
  };
  std::sort(candidates.begin(), candidates.end(), better);

  GroupingChoice choice{candidates.front().grouping, candidates.front().plan, {}, false};
  const double best_rate = choice.plan.rate;
  for (const auto& c : candidates) {
    if (std::abs(c.plan.rate - best_rate) <= kTieTolerance * best_rate) choice.co_optimal.push_back(c.grouping);
  }
  return choice;
}

/// Schedule CSV "modcod,alpha,r1,r2,receivers,time_fraction".
inline void write_plan_csv(std::ostream& os, const Plan& plan) {
  os << "modcod,alpha,r1,r2,receivers,time_fraction\n";
  for (const auto& e : plan.schedule) {
    const auto alpha = e.operating_point.alpha();
    os << fmt::format("{},{},{},{},{},{}\n", e.operating_point.provenance(),
                      alpha ? fmt::format("{}", *alpha) : std::string(), e.operating_point.r1,
                      e.operating_point.r2, fmt::join(e.receivers, " "), e.time_fraction);
  }
}

}  // namespace hmts
