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

#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace hmts;
using hmts::testing::shipped_table;

namespace {

std::vector<RatePoint> pts(std::initializer_list<std::pair<double, double>> xy) {
  std::vector<RatePoint> out;
  for (auto [a, b] : xy) out.push_back({a, b, PointKind::kHierarchical, std::nullopt, std::nullopt});
  return out;
}

// Exact equal-rate oracle: the best common rate is reached by mixing at most
// two points of the set closed under projections onto the axes, so try every
// pair and the best mixing weight for each.
double brute_force_equal_rate(const std::vector<RatePoint>& points) {
  std::vector<std::pair<double, double>> s;
  for (const auto& p : points) {
    s.emplace_back(p.r1, p.r2);
    s.emplace_back(p.r1, 0.0);
    s.emplace_back(0.0, p.r2);
  }
  double best = 0.0;
  for (auto [a1, a2] : s) {
    best = std::max(best, std::min(a1, a2));
    for (auto [b1, b2] : s) {
      // min(l a1 + (1-l) b1, l a2 + (1-l) b2) peaks where the lines cross.
      const double den = (a1 - b1) - (a2 - b2);
      if (std::abs(den) < 1e-15) continue;
      const double l = (b2 - b1) / den;
      if (l < 0.0 || l > 1.0) continue;
      best = std::max(best, l * a1 + (1 - l) * b1);
    }
  }
  return best;
}

// Height of the hull boundary at abscissa r1 (linear interpolation).
double hull_height(const std::vector<RatePoint>& hull, double r1) {
  for (std::size_t i = 0; i + 1 < hull.size(); ++i) {
    if (r1 >= hull[i].r1 - 1e-12 && r1 <= hull[i + 1].r1 + 1e-12) {
      const double w = hull[i + 1].r1 - hull[i].r1;
      if (w <= 0.0) return std::max(hull[i].r2, hull[i + 1].r2);
      const double l = (r1 - hull[i].r1) / w;
      return hull[i].r2 + l * (hull[i + 1].r2 - hull[i].r2);
    }
  }
  return hull.size() == 1 && std::abs(hull[0].r1 - r1) < 1e-12 ? hull[0].r2 : -1.0;
}

void expect_mix_reproduces(const EqualRateSolution& sol) {
  double r1 = 0.0, r2 = 0.0, w = 0.0;
  for (const auto& c : sol.mix) {
    r1 += c.weight * c.vertex.r1;
    r2 += c.weight * c.vertex.r2;
    w += c.weight;
    EXPECT_GE(c.weight, 0.0);
  }
  EXPECT_NEAR(w, 1.0, 1e-12);
  EXPECT_NEAR(r1, sol.rate, 1e-9);
  EXPECT_NEAR(r2, sol.rate, 1e-9);
}

}  // namespace

TEST(UpperHull, TwoAxisPoints) {
  const auto region = upper_hull(pts({{1, 0}, {0, 1}}));
  ASSERT_EQ(region.hull.size(), 2u);
  EXPECT_DOUBLE_EQ(region.hull[0].r2, 1.0);
  EXPECT_DOUBLE_EQ(region.hull[1].r1, 1.0);
  EXPECT_NEAR(equal_rate_point(region).rate, 0.5, 1e-12);
}

TEST(UpperHull, InteriorPointDropped) {
  const auto region = upper_hull(pts({{1, 0}, {0, 1}, {0.4, 0.4}}));
  EXPECT_EQ(region.hull.size(), 2u);
  for (const auto& h : region.hull) EXPECT_FALSE(h.r1 == 0.4 && h.r2 == 0.4);
  EXPECT_NEAR(equal_rate_point(region).rate, 0.5, 1e-12);
}

TEST(UpperHull, ExteriorPointKept) {
  const auto region = upper_hull(pts({{1, 0}, {0, 1}, {0.8, 0.8}}));
  ASSERT_EQ(region.hull.size(), 3u);
  EXPECT_DOUBLE_EQ(region.hull[1].r1, 0.8);
  const auto sol = equal_rate_point(region);
  EXPECT_NEAR(sol.rate, 0.8, 1e-12);
  ASSERT_EQ(sol.mix.size(), 1u);
  EXPECT_DOUBLE_EQ(sol.mix[0].weight, 1.0);
}

TEST(UpperHull, ProjectsOffAxisExtremes) {
  // (1, 0.5) is the right-most point; the hull must still reach the r1 axis.
  const auto region = upper_hull(pts({{1, 0.5}, {0.2, 1}}));
  EXPECT_DOUBLE_EQ(region.hull.front().r1, 0.0);
  EXPECT_DOUBLE_EQ(region.hull.back().r2, 0.0);
  EXPECT_TRUE(region.hull.front().projected);
  EXPECT_TRUE(region.hull.back().projected);
}

TEST(UpperHull, EmptyAndZeroInputs) {
  EXPECT_THROW(upper_hull(std::vector<RatePoint>{}), InvalidParameter);
  const auto region = upper_hull(pts({{0, 0}}));
  ASSERT_EQ(region.hull.size(), 1u);
  const auto sol = equal_rate_point(region);
  EXPECT_TRUE(sol.degenerate);
  EXPECT_EQ(sol.rate, 0.0);
}

TEST(EqualRate, ClassicalTimeSharing) {
  // Serving 4/3 and 2 alternately: 0.8 each with 60 % of the time on the first.
  const auto sol = equal_rate_point(upper_hull(pts({{4.0 / 3.0, 0}, {0, 2}})));
  EXPECT_NEAR(sol.rate, 0.8, 1e-12);
  ASSERT_EQ(sol.mix.size(), 2u);
  for (const auto& c : sol.mix) {
    if (c.vertex.r1 > 0) {
      EXPECT_NEAR(c.weight, 0.6, 1e-12);
    }
  }
  expect_mix_reproduces(sol);
}

TEST(EqualRate, DiagonalVertex) {
  const auto sol = equal_rate_point(upper_hull(pts({{1.2, 0}, {0.9, 0.9}, {0, 1.5}})));
  EXPECT_NEAR(sol.rate, 0.9, 1e-12);
  ASSERT_EQ(sol.mix.size(), 1u);
}

TEST(EqualRate, OnlyOneReceiverServed) {
  const auto sol = equal_rate_point(upper_hull(pts({{1, 0}})));
  EXPECT_TRUE(sol.degenerate);
}

TEST(EqualRate, RandomSetsAgainstBruteForce) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::uniform_int_distribution<int> count(1, 12);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<RatePoint> points;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) points.push_back({u(rng), u(rng), PointKind::kHierarchical, std::nullopt, std::nullopt});
    const auto region = upper_hull(points);

    // Hull runs left to right and dominates every input point. Only the end
    // edges down to the axes may be flat.
    const std::size_t h = region.hull.size();
    for (std::size_t i = 0; i + 1 < h; ++i) {
      const auto& a = region.hull[i];
      const auto& b = region.hull[i + 1];
      if (i + 2 < h) EXPECT_LT(a.r1, b.r1);
      else EXPECT_LE(a.r1, b.r1);
      if (i > 0) EXPECT_GT(a.r2, b.r2);
      else EXPECT_GE(a.r2, b.r2);
    }
    for (const auto& p : points) EXPECT_LE(p.r2, hull_height(region.hull, p.r1) + 1e-9);

    const auto sol = equal_rate_point(region);
    EXPECT_NEAR(sol.rate, brute_force_equal_rate(points), 1e-9);
    expect_mix_reproduces(sol);

    // Adding a point never lowers the equal rate.
    auto more = points;
    more.push_back({u(rng), u(rng), PointKind::kHierarchical, std::nullopt, std::nullopt});
    EXPECT_GE(equal_rate_point(upper_hull(more)).rate, sol.rate - 1e-12);
  }
}

TEST(BestSingle, Examples) {
  const auto& t = shipped_table();
  auto at8 = best_single_modcod(8.0, t);
  ASSERT_TRUE(at8);
  EXPECT_EQ(at8->modulation, ModulationId::kUniform16Qam);
  EXPECT_EQ(at8->coding_rate, (CodingRate{1, 2}));
  auto at4 = best_single_modcod(4.0, t);
  ASSERT_TRUE(at4);
  EXPECT_NEAR(at4->spectral_rate, 4.0 / 3.0, 1e-12);
  EXPECT_FALSE(best_single_modcod(-20.0, t));
}

TEST(AchievablePoints, PairFourEight) {
  const auto& t = shipped_table();
  const auto points = achievable_points(4.0, 8.0, t);
  const RatePoint* a4 = nullptr;
  const RatePoint* a05 = nullptr;
  const RatePoint* a08 = nullptr;
  for (const auto& p : points) {
    if (p.kind != PointKind::kHierarchical) continue;
    if (p.alpha() == 4.0) a4 = &p;
    if (p.alpha() == 0.5) a05 = &p;
    if (p.alpha() == 0.8) a08 = &p;
  }
  ASSERT_TRUE(a4 && a05 && a08);
  EXPECT_EQ(a4->r2, 0.0);
  EXPECT_GT(a4->r1, 0.0);
  EXPECT_DOUBLE_EQ(a05->r1, a08->r1);
  EXPECT_DOUBLE_EQ(a05->r2, a08->r2);

  const auto sol = equal_rate_point(upper_hull(points));
  EXPECT_GT(sol.rate, 0.8);
  expect_mix_reproduces(sol);
  const bool uses_uniform = std::any_of(sol.mix.begin(), sol.mix.end(),
                                        [](const MixComponent& c) { return c.vertex.alpha() == 1.0; });
  EXPECT_TRUE(uses_uniform);
}

TEST(AchievablePoints, RejectsUnorderedPair) {
  EXPECT_THROW(achievable_points(8.0, 4.0, shipped_table()), InvalidParameter);
}

TEST(AchievablePoints, NothingDecodable) {
  const auto points = achievable_points(-30.0, -29.0, shipped_table());
  ASSERT_EQ(points.size(), 1u);
  EXPECT_EQ(points[0].kind, PointKind::kNone);
}

TEST(PairEqualRate, SymmetricAndNeverBelowClassical) {
  const auto& t = shipped_table();
  for (double a = -4.0; a <= 16.0; a += 1.5) {
    for (double b = a; b <= 16.0; b += 1.5) {
      const auto h = pair_equal_rate(a, b, t);
      const auto h_swapped = pair_equal_rate(b, a, t);
      EXPECT_EQ(h.rate, h_swapped.rate);
      const auto c = pair_equal_rate(a, b, t, false);
      EXPECT_GE(h.rate, c.rate - 1e-12) << a << ' ' << b;
    }
  }
}

TEST(RegionCsv, Format) {
  const auto region = upper_hull(achievable_points(4.0, 8.0, shipped_table()));
  std::ostringstream os;
  write_region_csv(os, region);
  const auto s = os.str();
  EXPECT_EQ(s.rfind("r1,r2,provenance,is_hull_vertex\n", 0), 0u);
  EXPECT_GE(static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')), region.points.size() + 1);
  EXPECT_NE(s.find("H16QAM"), std::string::npos);
}
