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
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "hmts/error.hpp"

namespace hmts {

using Complex = std::complex<double>;

enum class ModulationId { kQpsk, kUniform16Qam, kHierarchical16Qam };

inline std::string_view to_string(ModulationId id) {
  switch (id) {
    case ModulationId::kQpsk: return "QPSK";
    case ModulationId::kUniform16Qam: return "16QAM";
    case ModulationId::kHierarchical16Qam: return "H16QAM";
  }
  return "?";
}

inline ModulationId parse_modulation(std::string_view s) {
  if (s == "QPSK") return ModulationId::kQpsk;
  if (s == "16QAM") return ModulationId::kUniform16Qam;
  if (s == "H16QAM") return ModulationId::kHierarchical16Qam;
  throw InvalidParameter(fmt::format("unknown modulation '{}'", s));
}

/// Labeled complex signal set normalized to unit mean symbol energy.
///
/// Labels are integers read MSB-first: for 16-point sets the two most
/// significant bits are the HP pair (quadrant), the two least significant
/// bits the LP pair (position inside the quadrant).
struct Constellation {
  ModulationId modulation = ModulationId::kQpsk;
  std::vector<Complex> points;
  std::vector<std::uint8_t> labels;
  int bits_per_symbol = 0;
  std::optional<double> alpha;  // only for 16-point sets

  std::size_t size() const { return points.size(); }
  bool has_hp_lp() const { return bits_per_symbol == 4; }

  unsigned hp_label(std::size_t i) const { return labels[i] >> 2; }
  unsigned lp_label(std::size_t i) const { return labels[i] & 0x3u; }

  std::string label_string(std::size_t i) const {
    std::string s(static_cast<std::size_t>(bits_per_symbol), '0');
    for (int b = 0; b < bits_per_symbol; ++b) {
      if ((labels[i] >> (bits_per_symbol - 1 - b)) & 1u) s[static_cast<std::size_t>(b)] = '1';
    }
    return s;
  }

  double mean_energy() const {
    double e = 0.0;
    for (const auto& p : points) e += std::norm(p);
    return e / static_cast<double>(points.size());
  }
};

namespace detail {

inline void normalize(std::vector<Complex>& pts) {
  double e = 0.0;
  for (const auto& p : pts) e += std::norm(p);
  const double scale = 1.0 / std::sqrt(e / static_cast<double>(pts.size()));
  for (auto& p : pts) p *= scale;
}

inline void require_positive_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InvalidParameter(fmt::format("constellation parameter must be > 0, got {}", alpha));
  }
}

}  // namespace detail

/// Non-uniform 16-QAM: a QPSK of parameter 2(d_h + d_l) selecting the
/// quadrant (HP bits) superposed with a QPSK of parameter 2 d_l selecting the
/// point inside it (LP bits), with alpha = d_h / d_l.
///
/// Labeling is Gray on each axis with the in-quadrant bits mirrored across
/// the axes: bit0/bit1 give the sign of I/Q (0 = positive), bit2/bit3 give
/// the magnitude of I/Q (0 = outer, 1 = inner).
inline Constellation build_hierarchical_16qam(double alpha) {
  detail::require_positive_alpha(alpha);
  // d_l = 1, d_h = alpha before normalization.
  const double centre = alpha + 1.0;
  Constellation c;
  c.modulation = ModulationId::kHierarchical16Qam;
  c.bits_per_symbol = 4;
  c.alpha = alpha;
  c.points.reserve(16);
  c.labels.reserve(16);
  for (unsigned label = 0; label < 16; ++label) {
    const double si = (label & 0x8u) ? -1.0 : 1.0;
    const double sq = (label & 0x4u) ? -1.0 : 1.0;
    const double mi = (label & 0x2u) ? -1.0 : 1.0;  // inner pulls towards the axis
    const double mq = (label & 0x1u) ? -1.0 : 1.0;
    c.points.emplace_back(si * (centre + mi), sq * (centre + mq));
    c.labels.push_back(static_cast<std::uint8_t>(label));
  }
  detail::normalize(c.points);
  return c;
}

inline Constellation build_reference(ModulationId id) {
  switch (id) {
    case ModulationId::kQpsk: {
      Constellation c;
      c.modulation = id;
      c.bits_per_symbol = 2;
      const double a = 1.0 / std::sqrt(2.0);
      for (unsigned label = 0; label < 4; ++label) {
        c.points.emplace_back((label & 0x2u) ? -a : a, (label & 0x1u) ? -a : a);
        c.labels.push_back(static_cast<std::uint8_t>(label));
      }
      return c;
    }
    case ModulationId::kUniform16Qam: {
      Constellation c = build_hierarchical_16qam(1.0);
      c.modulation = id;
      return c;
    }
    case ModulationId::kHierarchical16Qam:
      break;
  }
  throw InvalidParameter(
      fmt::format("'{}' is not a reference modulation", to_string(id)));
}

/// Energy fractions carried by the HP and LP streams; hp / lp = (1 + alpha)^2.
struct EnergySplit {
  double hp_fraction;
  double lp_fraction;
};

inline EnergySplit energy_split(double alpha) {
  detail::require_positive_alpha(alpha);
  const double ratio = (1.0 + alpha) * (1.0 + alpha);
  return {ratio / (ratio + 1.0), 1.0 / (ratio + 1.0)};
}

/// Half of the minimum distance between any two points (d_l).
inline double half_min_distance(const Constellation& c) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j) best = std::min(best, std::abs(c.points[i] - c.points[j]));
  return best / 2.0;
}

/// Half of the minimum distance between points with different HP bits (d_h).
inline double half_min_hp_distance(const Constellation& c) {
  if (!c.has_hp_lp()) throw InvalidParameter("HP distance needs a 16-point constellation");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j)
      if (c.hp_label(i) != c.hp_label(j)) best = std::min(best, std::abs(c.points[i] - c.points[j]));
  return best / 2.0;
}

/// CSV rows "label,re,im" with a header line.
inline void write_csv(std::ostream& os, const Constellation& c) {
  os << "label,re,im\n";
  for (std::size_t i = 0; i < c.size(); ++i) {
    os << fmt::format("{},{},{}\n", c.label_string(i), c.points[i].real(), c.points[i].imag());
  }
}

}  // namespace hmts
