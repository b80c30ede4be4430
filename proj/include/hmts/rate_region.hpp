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
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "hmts/error.hpp"
#include "hmts/thresholds.hpp"

namespace hmts {

inline constexpr double kRateTolerance = 1e-9;

enum class PointKind {
  kNone,          // nothing decodable
  kSingleFirst,   // one FULL modcod serving receiver 1
  kSingleSecond,  // one FULL modcod serving receiver 2
  kHierarchical,  // HP stream to receiver 1, LP stream to receiver 2
};

/// An achievable (R1, R2) pair for a receiver pair; receiver 1 is the one
/// with the lower SNR.
struct RatePoint {
  double r1 = 0.0;
  double r2 = 0.0;
  PointKind kind = PointKind::kNone;
  std::optional<ModCod> first;   // modcod carrying receiver 1's data
  std::optional<ModCod> second;  // modcod carrying receiver 2's data
  bool projected = false;        // hull vertex obtained by dropping one receiver's rate

  std::optional<double> alpha() const {
    if (first && first->alpha) return first->alpha;
    if (second && second->alpha) return second->alpha;
    return std::nullopt;
  }

  std::string provenance() const {
    std::string s;
    switch (kind) {
      case PointKind::kNone: s = "none"; break;
      case PointKind::kSingleFirst: s = first->name(); break;
      case PointKind::kSingleSecond: s = second->name(); break;
      case PointKind::kHierarchical:
        s = fmt::format("{} + {}", first ? first->name() : std::string("-"),
                        second ? second->name() : std::string("-"));
        break;
    }
    return projected ? s + " (projected)" : s;
  }
};

/// Rate pairs and their Pareto (upper-right) convex hull, ordered by
/// increasing r1 from (0, R2max) to (R1max, 0).
struct RateRegion {
  std::vector<RatePoint> points;
  std::vector<RatePoint> hull;
};

struct MixComponent {
  RatePoint vertex;
  double weight = 0.0;
};

/// Largest common rate (R, R) reachable by time sharing between at most two
/// hull vertices.
struct EqualRateSolution {
  double rate = 0.0;
  std::vector<MixComponent> mix;
  bool degenerate = false;
};

/// Best classical (single FULL modcod) choice at `snr_db`. Ties on spectral
/// rate go to the lower threshold.
inline std::optional<ModCod> best_single_modcod(double snr_db, const ModCodTable& table) {
  const ModCod* best = nullptr;
  for (const auto& e : table.entries) {
    if (e.stream != Stream::kFull || e.modulation == ModulationId::kHierarchical16Qam) continue;
    if (e.threshold_db > snr_db) continue;
    if (!best || e.spectral_rate > best->spectral_rate + kRateTolerance ||
        (std::abs(e.spectral_rate - best->spectral_rate) <= kRateTolerance && e.threshold_db < best->threshold_db)) {
      best = &e;
    }
  }
  if (!best) return std::nullopt;
  return *best;
}

/// Classical points only: each receiver served alone by its best modcod.
inline std::vector<RatePoint> classical_points(double snr_lo, double snr_hi, const ModCodTable& table) {
  std::vector<RatePoint> out;
  if (auto m = best_single_modcod(snr_lo, table)) {
    out.push_back({m->spectral_rate, 0.0, PointKind::kSingleFirst, m, std::nullopt});
  }
  if (auto m = best_single_modcod(snr_hi, table)) {
    out.push_back({0.0, m->spectral_rate, PointKind::kSingleSecond, std::nullopt, m});
  }
  if (out.empty()) out.push_back({});
  return out;
}

/// Rate pairs for a receiver pair: both classical points plus, for every
/// alpha of the table, the hierarchical point pairing the highest decodable
/// HP rate at `snr_lo` with the highest decodable LP rate at `snr_hi`.
inline std::vector<RatePoint> achievable_points(double snr_lo, double snr_hi, const ModCodTable& table) {
  if (snr_lo > snr_hi) {
    throw InvalidParameter(fmt::format("receiver SNRs out of order: {} > {}", snr_lo, snr_hi));
  }
  std::vector<RatePoint> out = classical_points(snr_lo, snr_hi, table);
  if (out.size() == 1 && out.front().kind == PointKind::kNone) out.clear();

  for (double alpha : table.alphas()) {
    const ModCod* hp = table.best_decodable(ModulationId::kHierarchical16Qam, alpha, Stream::kHp, snr_lo);
    const ModCod* lp = table.best_decodable(ModulationId::kHierarchical16Qam, alpha, Stream::kLp, snr_hi);
    if (!hp && !lp) continue;
    RatePoint p;
    p.kind = PointKind::kHierarchical;
    if (hp) {
      p.r1 = hp->spectral_rate;
      p.first = *hp;
    }
    if (lp) {
      p.r2 = lp->spectral_rate;
      p.second = *lp;
    }
    out.push_back(std::move(p));
  }
  if (out.empty()) out.push_back({});
  return out;
}

/// Pareto upper-right convex hull of `points` under free disposal (any rate
/// may be lowered), so the hull runs from (0, R2max) to (R1max, 0).
/// Collinear points are not kept as vertices.
inline RateRegion upper_hull(std::span<const RatePoint> points) {
  if (points.empty()) throw InvalidParameter("rate region needs at least one point");
  RateRegion region{{points.begin(), points.end()}, {}};

  const auto top = std::max_element(points.begin(), points.end(),
                                    [](const RatePoint& a, const RatePoint& b) { return a.r2 < b.r2; });
  const auto right = std::max_element(points.begin(), points.end(),
                                      [](const RatePoint& a, const RatePoint& b) { return a.r1 < b.r1; });
  if (top->r2 <= 0.0 && right->r1 <= 0.0) {
    region.hull.push_back(RatePoint{});
    return region;
  }

  std::vector<RatePoint> candidates(points.begin(), points.end());
  auto projection = [](RatePoint p, bool keep_first) {
    if (keep_first) {
      p.r2 = 0.0;
      if (p.kind == PointKind::kHierarchical) p.second.reset();
    } else {
      p.r1 = 0.0;
      if (p.kind == PointKind::kHierarchical) p.first.reset();
    }
    if (p.r1 <= 0.0 && p.r2 <= 0.0) return RatePoint{};
    p.projected = true;
    return p;
  };
  if (top->r1 > 0.0) candidates.push_back(projection(*top, false));
  if (right->r2 > 0.0 || right->r1 <= 0.0) candidates.push_back(projection(*right, true));

  std::stable_sort(candidates.begin(), candidates.end(), [](const RatePoint& a, const RatePoint& b) {
    if (a.r1 != b.r1) return a.r1 < b.r1;
    if (a.r2 != b.r2) return a.r2 > b.r2;
    return !a.projected && b.projected;
  });

  auto cross = [](const RatePoint& o, const RatePoint& a, const RatePoint& b) {
    return (a.r1 - o.r1) * (b.r2 - o.r2) - (a.r2 - o.r2) * (b.r1 - o.r1);
  };
  std::vector<RatePoint>& hull = region.hull;
  for (const auto& p : candidates) {
    if (!hull.empty() && std::abs(hull.back().r1 - p.r1) <= kRateTolerance &&
        std::abs(hull.back().r2 - p.r2) <= kRateTolerance) {
      continue;  // duplicate; the first (non-projected) copy wins
    }
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), p) >= -kRateTolerance) hull.pop_back();
    hull.push_back(p);
  }
  return region;
}

/// Intersection of the hull boundary with the diagonal r1 = r2.
inline EqualRateSolution equal_rate_point(const RateRegion& region) {
  EqualRateSolution sol;
  const auto& hull = region.hull;
  const bool first_served = std::any_of(hull.begin(), hull.end(), [](const RatePoint& p) { return p.r1 > 0.0; });
  const bool second_served = std::any_of(hull.begin(), hull.end(), [](const RatePoint& p) { return p.r2 > 0.0; });
  if (!first_served || !second_served) {
    sol.degenerate = true;
    return sol;
  }
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const double g = hull[i].r1 - hull[i].r2;
    if (std::abs(g) <= kRateTolerance) {
      sol.rate = 0.5 * (hull[i].r1 + hull[i].r2);
      sol.mix.push_back({hull[i], 1.0});
      return sol;
    }
    if (g > 0.0) {
      // hull[i-1] lies above the diagonal, hull[i] below.
      const RatePoint& v = hull[i - 1];
      const RatePoint& w = hull[i];
      const double gv = v.r1 - v.r2;
      const double tau = g / (g - gv);  // weight on v
      sol.rate = tau * v.r1 + (1.0 - tau) * w.r1;
      sol.mix.push_back({v, tau});
      sol.mix.push_back({w, 1.0 - tau});
      return sol;
    }
  }
  sol.degenerate = true;
  return sol;
}

/// Equal-rate solution for a receiver pair given in any order.
inline EqualRateSolution pair_equal_rate(double snr_a, double snr_b, const ModCodTable& table,
                                         bool hierarchical = true) {
  const double lo = std::min(snr_a, snr_b);
  const double hi = std::max(snr_a, snr_b);
  const auto pts = hierarchical ? achievable_points(lo, hi, table) : classical_points(lo, hi, table);
  return equal_rate_point(upper_hull(pts));
}

/// CSV "r1,r2,provenance,is_hull_vertex": every generated point, then any
/// projected hull vertex that is not itself a generated point.
inline void write_region_csv(std::ostream& os, const RateRegion& region) {
  auto is_vertex = [&](const RatePoint& p) {
    return std::any_of(region.hull.begin(), region.hull.end(), [&](const RatePoint& h) {
      return !h.projected && h.kind == p.kind && std::abs(h.r1 - p.r1) <= kRateTolerance &&
             std::abs(h.r2 - p.r2) <= kRateTolerance;
    });
  };
  os << "r1,r2,provenance,is_hull_vertex\n";
  for (const auto& p : region.points) {
    os << fmt::format("{},{},{},{}\n", p.r1, p.r2, p.provenance(), is_vertex(p) ? 1 : 0);
  }
  for (const auto& h : region.hull) {
    if (h.projected) os << fmt::format("{},{},{},1\n", h.r1, h.r2, h.provenance());
  }
}

}  // namespace hmts
