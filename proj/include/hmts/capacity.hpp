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

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "hmts/constellation.hpp"
#include "hmts/error.hpp"

namespace hmts {

/// Which bits of the constellation label a capacity refers to.
///
/// kLp is the LP bit pair as seen by a receiver that does not know the
/// quadrant: I(L;Y). kLpGivenHp is the conditional term I(X;Y|Q) of the
/// chain rule, so that FULL = HP + LP_GIVEN_HP exactly.
enum class Stream { kFull, kHp, kLp, kLpGivenHp };

inline std::string_view to_string(Stream s) {
  switch (s) {
    case Stream::kFull: return "FULL";
    case Stream::kHp: return "HP";
    case Stream::kLp: return "LP";
    case Stream::kLpGivenHp: return "LP_GIVEN_HP";
  }
  return "?";
}

inline Stream parse_stream(std::string_view s) {
  if (s == "FULL") return Stream::kFull;
  if (s == "HP") return Stream::kHp;
  if (s == "LP") return Stream::kLp;
  if (s == "LP_GIVEN_HP") return Stream::kLpGivenHp;
  throw InvalidParameter(fmt::format("unknown stream '{}'", s));
}

enum class IntegrationMethod { kGaussHermite, kMonteCarlo };

struct IntegrationSpec {
  static constexpr int kMinNodes = 16;
  static constexpr int kMaxNodes = 200;
  static constexpr std::int64_t kMinSamples = 100'000;

  IntegrationMethod method = IntegrationMethod::kGaussHermite;
  int nodes_per_axis = 32;
  std::int64_t sample_count = 1'000'000;
  std::uint64_t rng_seed = 1;

  void validate() const {
    if (method == IntegrationMethod::kGaussHermite &&
        (nodes_per_axis < kMinNodes || nodes_per_axis > kMaxNodes)) {
      throw ConfigurationError(fmt::format("Gauss-Hermite needs {}..{} nodes per axis, got {}",
                                           kMinNodes, kMaxNodes, nodes_per_axis));
    }
    if (method == IntegrationMethod::kMonteCarlo && sample_count < kMinSamples) {
      throw ConfigurationError(
          fmt::format("Monte Carlo needs at least {} samples, got {}", kMinSamples, sample_count));
    }
  }

  static IntegrationSpec monte_carlo(std::int64_t samples, std::uint64_t seed) {
    IntegrationSpec s;
    s.method = IntegrationMethod::kMonteCarlo;
    s.sample_count = samples;
    s.rng_seed = seed;
    return s;
  }
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Number of label bits a stream carries.
inline int stream_bits(const Constellation& c, Stream s) {
  if (s == Stream::kFull) return c.bits_per_symbol;
  if (!c.has_hp_lp()) {
    throw InvalidParameter(fmt::format("stream {} is only defined for 16-point constellations",
                                       to_string(s)));
  }
  return 2;
}

/// Nodes and weights for integrals against exp(-x^2).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Hermite rule by Newton iteration on the orthonormal Hermite
/// recurrence (stable for large n).
inline QuadratureRule gauss_hermite_rule(int n) {
  if (n < 1) throw InvalidParameter("Gauss-Hermite rule needs n >= 1");
  constexpr double kPim4 = 0.7511255444649425;  // pi^(-1/4)
  QuadratureRule rule;
  rule.nodes.assign(static_cast<std::size_t>(n), 0.0);
  rule.weights.assign(static_cast<std::size_t>(n), 0.0);
  const int m = (n + 1) / 2;
  const double nd = static_cast<double>(n);
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * nd + 1.0) - 1.85575 * std::pow(2.0 * nd + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(nd, 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * rule.nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * rule.nodes[1];
    } else {
      z = 2.0 * z - rule.nodes[static_cast<std::size_t>(i - 2)];
    }
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = kPim4;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        const double jd = static_cast<double>(j);
        p1 = z * std::sqrt(2.0 / (jd + 1.0)) * p2 - std::sqrt(jd / (jd + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * nd) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    rule.nodes[lo] = z;
    rule.nodes[hi] = -z;
    rule.weights[lo] = 2.0 / (pp * pp);
    rule.weights[hi] = rule.weights[lo];
  }
  return rule;
}

/// Capacities of every stream of a constellation at one Es/N0, in bits/symbol.
struct StreamCapacities {
  double full = 0.0;
  double hp = 0.0;
  double lp = 0.0;
  double lp_given_hp = 0.0;

  double get(Stream s) const {
    switch (s) {
      case Stream::kFull: return full;
      case Stream::kHp: return hp;
      case Stream::kLp: return lp;
      case Stream::kLpGivenHp: return lp_given_hp;
    }
    return 0.0;
  }
};

namespace detail {

/// Accumulates, for one transmitted point and one noise realization, the
/// log2-ratios whose expectations give the label informations.
class InformationAccumulator {
 public:
  InformationAccumulator(const Constellation& c, double n0)
      : c_(c), n0_(n0), hp_lp_(c.has_hp_lp()), metric_(c.size()) {}

  // Adds weight * log2 terms for transmitted index k and noise sample n.
  void add(std::size_t k, Complex noise, double weight) {
    const Complex x = c_.points[k];
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c_.size(); ++j) {
      const Complex d = x - c_.points[j] + noise;
      metric_[j] = -(std::norm(d) - std::norm(noise)) / n0_;
      peak = std::max(peak, metric_[j]);
    }
    double total = 0.0;
    double same_hp = 0.0;
    double same_lp = 0.0;
    for (std::size_t j = 0; j < c_.size(); ++j) {
      const double e = std::exp(metric_[j] - peak);
      total += e;
      if (hp_lp_) {
        if (c_.hp_label(j) == c_.hp_label(k)) same_hp += e;
        if (c_.lp_label(j) == c_.lp_label(k)) same_lp += e;
      }
    }
    // Own metric is 0, so log p(y|x_k) - peak = -peak.
    const double log2_total = std::log2(total);
    full_ += weight * (-peak / std::numbers::ln2 - log2_total);
    if (hp_lp_) {
      hp_ += weight * (std::log2(same_hp) - log2_total);
      lp_ += weight * (std::log2(same_lp) - log2_total);
    }
  }

  StreamCapacities finish(double total_weight) const {
    StreamCapacities out;
    const double m = static_cast<double>(c_.bits_per_symbol);
    out.full = clamp(m + full_ / total_weight, m);
    if (hp_lp_) {
      out.hp = clamp(2.0 + hp_ / total_weight, 2.0);
      out.lp = clamp(2.0 + lp_ / total_weight, 2.0);
      out.lp_given_hp = clamp(out.full - out.hp, 2.0);
    }
    return out;
  }

 private:
  static double clamp(double v, double hi) { return std::min(std::max(v, 0.0), hi); }

  const Constellation& c_;
  double n0_;
  bool hp_lp_;
  std::vector<double> metric_;
  double full_ = 0.0;
  double hp_ = 0.0;
  double lp_ = 0.0;
};

}  // namespace detail

/// Mutual information of every stream over complex AWGN with Es = 1 and
/// N0 = 10^(-es_n0_db / 10), inputs uniform over the constellation.
inline StreamCapacities all_stream_capacities(const Constellation& c, double es_n0_db,
                                              const IntegrationSpec& spec = {}) {
  spec.validate();
  const double n0 = 1.0 / db_to_linear(es_n0_db);
  detail::InformationAccumulator acc(c, n0);
  double total_weight = 0.0;
  if (spec.method == IntegrationMethod::kGaussHermite) {
    const QuadratureRule rule = gauss_hermite_rule(spec.nodes_per_axis);
    // Re, Im ~ N(0, N0/2): substitute n = sqrt(N0) (u + i v).
    const double scale = std::sqrt(n0);
    for (std::size_t k = 0; k < c.size(); ++k) {
      for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
        for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
          const double w = rule.weights[a] * rule.weights[b] / std::numbers::pi;
          acc.add(k, Complex(scale * rule.nodes[a], scale * rule.nodes[b]), w);
          total_weight += w;
        }
      }
    }
  } else {
    const auto m = static_cast<std::int64_t>(c.size());
    const std::int64_t per_point = (spec.sample_count + m - 1) / m;
    const double sigma = std::sqrt(n0 / 2.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
      // One stream per transmitted symbol, seeded from (seed, index).
      std::seed_seq seq{static_cast<std::uint32_t>(spec.rng_seed),
                        static_cast<std::uint32_t>(spec.rng_seed >> 32),
                        static_cast<std::uint32_t>(k)};
      std::mt19937_64 rng(seq);
      std::normal_distribution<double> gauss(0.0, sigma);
      for (std::int64_t i = 0; i < per_point; ++i) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        acc.add(k, Complex(re, im), 1.0);
      }
      total_weight += static_cast<double>(per_point);
    }
  }
  return acc.finish(total_weight);
}

inline double stream_capacity(const Constellation& c, Stream s, double es_n0_db,
                              const IntegrationSpec& spec = {}) {
  stream_bits(c, s);
  return all_stream_capacities(c, es_n0_db, spec).get(s);
}

/// Capacity per stream bit, in [0, 1].
inline double normalized_capacity(const Constellation& c, Stream s, double es_n0_db,
                                  const IntegrationSpec& spec = {}) {
  const int bits = stream_bits(c, s);
  return stream_capacity(c, s, es_n0_db, spec) / static_cast<double>(bits);
}

struct SnrBracket {
  double lo_db = -30.0;
  double hi_db = 40.0;
};

/// Es/N0 (dB) at which the normalized capacity equals `target`, by bisection.
inline double inverse_capacity(const Constellation& c, Stream s, double target,
                               const IntegrationSpec& spec = {}, double tolerance_db = 1e-3,
                               SnrBracket bracket = {}) {
  if (!(target > 0.0 && target < 1.0)) {
    throw InvalidParameter(fmt::format("target normalized capacity must lie in (0,1), got {}", target));
  }
  double lo = bracket.lo_db;
  double hi = bracket.hi_db;
  const double f_lo = normalized_capacity(c, s, lo, spec);
  const double f_hi = normalized_capacity(c, s, hi, spec);
  if (target < f_lo || target > f_hi) {
    throw OutOfRange(fmt::format("normalized capacity {} of {} not reachable in [{}, {}] dB",
                                 target, to_string(s), lo, hi));
  }
  while (hi - lo > tolerance_db) {
    const double mid = 0.5 * (lo + hi);
    if (normalized_capacity(c, s, mid, spec) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct CapacitySample {
  Stream stream;
  std::optional<double> alpha;
  double es_n0_db;
  double capacity;
};

inline std::vector<CapacitySample> capacity_curve(const Constellation& c, std::span<const double> grid_db,
                                                  const IntegrationSpec& spec = {}) {
  std::vector<CapacitySample> out;
  for (double snr : grid_db) {
    const StreamCapacities caps = all_stream_capacities(c, snr, spec);
    out.push_back({Stream::kFull, c.alpha, snr, caps.full});
    if (c.has_hp_lp()) {
      out.push_back({Stream::kHp, c.alpha, snr, caps.hp});
      out.push_back({Stream::kLp, c.alpha, snr, caps.lp});
      out.push_back({Stream::kLpGivenHp, c.alpha, snr, caps.lp_given_hp});
    }
  }
  return out;
}

/// CSV "selector,alpha,es_n0_db,capacity"; alpha is empty for reference sets.
inline void write_capacity_csv(std::ostream& os, std::span<const CapacitySample> rows) {
  os << "selector,alpha,es_n0_db,capacity\n";
  for (const auto& r : rows) {
    os << fmt::format("{},{},{},{}\n", to_string(r.stream),
                      r.alpha ? fmt::format("{}", *r.alpha) : std::string(), r.es_n0_db, r.capacity);
  }
}

}  // namespace hmts
