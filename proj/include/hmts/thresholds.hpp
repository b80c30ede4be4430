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
#include <array>
#include <cmath>
#include <compare>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "hmts/capacity.hpp"
#include "hmts/constellation.hpp"
#include "hmts/csv.hpp"
#include "hmts/error.hpp"

namespace hmts {

/// Code rate as an exact fraction.
struct CodingRate {
  int num = 1;
  int den = 1;

  constexpr double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend constexpr bool operator==(CodingRate a, CodingRate b) {
    return static_cast<long>(a.num) * b.den == static_cast<long>(b.num) * a.den;
  }
  friend constexpr std::strong_ordering operator<=>(CodingRate a, CodingRate b) {
    return static_cast<long>(a.num) * b.den <=> static_cast<long>(b.num) * a.den;
  }

  std::string to_string() const { return fmt::format("{}/{}", num, den); }

  static CodingRate parse(std::string_view s) {
    const auto slash = s.find('/');
    if (slash == std::string_view::npos) throw ConfigurationError(fmt::format("bad coding rate '{}'", s));
    const double n = csv::parse_double(s.substr(0, slash));
    const double d = csv::parse_double(s.substr(slash + 1));
    if (n <= 0 || d <= 0 || n != std::floor(n) || d != std::floor(d) || n > d) {
      throw ConfigurationError(fmt::format("bad coding rate '{}'", s));
    }
    return {static_cast<int>(n), static_cast<int>(d)};
  }
};

/// Turbo code rates of the DVB-SH physical layer.
inline constexpr std::array<CodingRate, 8> kCodingRates{{
    {1, 5}, {2, 9}, {1, 4}, {2, 7}, {1, 3}, {2, 5}, {1, 2}, {2, 3}}};

/// Constellation parameters of the published threshold table.
inline constexpr std::array<double, 5> kTableAlphas{4.0, 2.0, 1.0, 0.8, 0.5};

inline bool same_alpha(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }

enum class ReferenceSource { kPublished, kDataFile, kReconstructed };

/// Es/N0 where QPSK with this code rate reaches the target BER of 1e-5.
struct ReferencePoint {
  CodingRate coding_rate;
  double qpsk_es_n0_db = 0.0;
  ReferenceSource source = ReferenceSource::kDataFile;
};

/// QPSK operating points shipped with the library. Rate 1/5 is the published
/// anchor; the others were reconstructed from the published hierarchical
/// thresholds (see reconstruct_references) and rounded to 0.01 dB.
inline std::vector<ReferencePoint> shipped_references() {
  return {
      {{1, 5}, -3.9, ReferenceSource::kPublished},
      {{2, 9}, -3.40, ReferenceSource::kReconstructed},
      {{1, 4}, -2.77, ReferenceSource::kReconstructed},
      {{2, 7}, -2.09, ReferenceSource::kReconstructed},
      {{1, 3}, -1.21, ReferenceSource::kReconstructed},
      {{2, 5}, -0.19, ReferenceSource::kReconstructed},
      {{1, 2}, 1.10, ReferenceSource::kReconstructed},
      {{2, 3}, 3.22, ReferenceSource::kReconstructed},
  };
}

inline constexpr std::string_view kReferenceCsvHeader = "coding_rate,qpsk_es_n0_db";

inline void write_references_csv(std::ostream& os, std::span<const ReferencePoint> refs) {
  os << kReferenceCsvHeader << '\n';
  for (const auto& r : refs) os << fmt::format("{},{}\n", r.coding_rate.to_string(), r.qpsk_es_n0_db);
}

inline std::vector<ReferencePoint> read_references_csv(std::istream& is) {
  std::vector<ReferencePoint> refs;
  for (const auto& row : csv::read(is, kReferenceCsvHeader)) {
    refs.push_back({CodingRate::parse(row[0]), csv::parse_double(row[1]), ReferenceSource::kDataFile});
  }
  return refs;
}

inline std::vector<ReferencePoint> load_references(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError(fmt::format("cannot open reference file '{}'", path));
  return read_references_csv(in);
}

/// One row of the modcod menu.
struct ModCod {
  ModulationId modulation = ModulationId::kQpsk;
  std::optional<double> alpha;
  Stream stream = Stream::kFull;
  CodingRate coding_rate;
  double spectral_rate = 0.0;  // bits/symbol
  double threshold_db = 0.0;

  std::string name() const {
    std::string s(to_string(modulation));
    if (alpha) s += fmt::format("(a={})", *alpha);
    if (stream != Stream::kFull) s += fmt::format("-{}", to_string(stream));
    return s + " " + coding_rate.to_string();
  }

  bool in_family(ModulationId mod, std::optional<double> a, Stream s) const {
    if (modulation != mod || stream != s || a.has_value() != alpha.has_value()) return false;
    return !a || same_alpha(*a, *alpha);
  }

  friend bool operator==(const ModCod&, const ModCod&) = default;
};

struct ModCodTable {
  std::vector<ModCod> entries;
  double pilot_offset_db = 0.0;

  std::vector<double> alphas() const {
    std::vector<double> out;
    for (const auto& e : entries) {
      if (e.alpha && std::none_of(out.begin(), out.end(), [&](double a) { return same_alpha(a, *e.alpha); })) {
        out.push_back(*e.alpha);
      }
    }
    return out;
  }

  /// Entries of one (modulation, alpha, stream) family sorted by coding rate.
  std::vector<ModCod> family(ModulationId mod, std::optional<double> alpha, Stream stream) const {
    std::vector<ModCod> out;
    for (const auto& e : entries) {
      if (e.in_family(mod, alpha, stream)) out.push_back(e);
    }
    std::sort(out.begin(), out.end(),
              [](const ModCod& a, const ModCod& b) { return a.coding_rate < b.coding_rate; });
    return out;
  }

  const ModCod* find(ModulationId mod, std::optional<double> alpha, Stream stream, CodingRate rate) const {
    for (const auto& e : entries) {
      if (e.in_family(mod, alpha, stream) && e.coding_rate == rate) return &e;
    }
    return nullptr;
  }

  /// Highest coding-rate entry of a family decodable at `snr_db`.
  const ModCod* best_decodable(ModulationId mod, std::optional<double> alpha, Stream stream,
                               double snr_db) const {
    const ModCod* best = nullptr;
    for (const auto& e : entries) {
      if (!e.in_family(mod, alpha, stream) || e.threshold_db > snr_db) continue;
      if (!best || best->spectral_rate < e.spectral_rate) best = &e;
    }
    return best;
  }
};

inline constexpr std::string_view kTableCsvHeader =
    "modulation,alpha,stream,coding_rate,spectral_rate,threshold_db";

inline void write_table_csv(std::ostream& os, const ModCodTable& table) {
  os << kTableCsvHeader << '\n';
  for (const auto& e : table.entries) {
    os << fmt::format("{},{},{},{},{},{}\n", to_string(e.modulation),
                      e.alpha ? fmt::format("{}", *e.alpha) : std::string(), to_string(e.stream),
                      e.coding_rate.to_string(), e.spectral_rate, e.threshold_db);
  }
}

/// Thresholds in the file already include whatever pilot offset was applied
/// when it was written; the returned table carries a zero offset.
inline ModCodTable read_table_csv(std::istream& is) {
  ModCodTable table;
  for (const auto& row : csv::read(is, kTableCsvHeader)) {
    ModCod e;
    e.modulation = parse_modulation(row[0]);
    if (!row[1].empty()) e.alpha = csv::parse_double(row[1]);
    e.stream = parse_stream(row[2]);
    e.coding_rate = CodingRate::parse(row[3]);
    e.spectral_rate = csv::parse_double(row[4]);
    e.threshold_db = csv::parse_double(row[5]);
    table.entries.push_back(e);
  }
  return table;
}

inline ModCodTable load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError(fmt::format("cannot open modcod table '{}'", path));
  return read_table_csv(in);
}

/// Normalized QPSK capacity at a reference operating point: the
/// code-performance proxy transported to other constellations.
inline double reference_normalized_capacity(const ReferencePoint& ref, const IntegrationSpec& spec = {}) {
  return normalized_capacity(build_reference(ModulationId::kQpsk), Stream::kFull, ref.qpsk_es_n0_db, spec);
}

/// Es/N0 at which `stream` of `c` has the same normalized capacity as QPSK
/// at the reference point of `coding_rate`.
inline double derive_threshold(const Constellation& c, Stream stream, CodingRate coding_rate,
                               const ReferencePoint& ref, const IntegrationSpec& spec = {}) {
  if (!(ref.coding_rate == coding_rate)) {
    throw InvalidParameter(fmt::format("reference point is for rate {}, asked for {}",
                                       ref.coding_rate.to_string(), coding_rate.to_string()));
  }
  return inverse_capacity(c, stream, reference_normalized_capacity(ref, spec), spec);
}

/// One cell of a published hierarchical threshold grid.
struct PublishedCell {
  CodingRate coding_rate;
  double alpha = 1.0;
  Stream stream = Stream::kHp;
  double threshold_db = 0.0;
};

/// Published hierarchical 16-QAM thresholds (dB), pilot loss already removed.
/// Reproduced verbatim, including cells that are inconsistent with their
/// neighbours.
inline std::vector<PublishedCell> published_hierarchical_thresholds() {
  // Per rate: (HP, LP) for alpha = 4, 2, 1, 0.8, 0.5.
  static constexpr std::array<std::array<double, 10>, 8> kGrid{{
      {-3.6, 10.3, -3.2, 6.2, -2.5, 3.7, -2.1, 3.2, -1.4, 2.6},
      {-3.1, 10.8, -2.6, 6.8, -1.9, 4.1, -1.6, 3.6, -0.8, 2.9},
      {-2.5, 11.4, -2.0, 7.3, -1.2, 4.6, -0.9, 4.1, 0.0, 3.4},
      {-1.8, 12.1, -1.3, 8.0, -0.4, 5.2, 0.0, 4.7, 0.9, 3.9},
      {-0.9, 12.9, -0.4, 8.8, 0.7, 6.0, 1.1, 5.4, 2.2, 4.6},
      {0.2, 14.0, 2.0, 6.8, 9.9, 6.9, 2.5, 6.3, 3.8, 5.4},
      {1.6, 15.3, 7.3, 11.3, 3.7, 8.1, 4.4, 7.5, 6.2, 6.5},
      {3.9, 17.5, 4.9, 13.4, 7.0, 10.2, 8.1, 9.5, 11.0, 8.4},
  }};
  std::vector<PublishedCell> cells;
  for (std::size_t r = 0; r < kCodingRates.size(); ++r) {
    for (std::size_t a = 0; a < kTableAlphas.size(); ++a) {
      cells.push_back({kCodingRates[r], kTableAlphas[a], Stream::kHp, kGrid[r][2 * a]});
      cells.push_back({kCodingRates[r], kTableAlphas[a], Stream::kLp, kGrid[r][2 * a + 1]});
    }
  }
  return cells;
}

/// A published cell that disagrees with the rest of its row.
struct ThresholdAnomaly {
  PublishedCell cell;
  double implied_threshold_db = 0.0;  // from the row's consensus capacity
  double deviation_db = 0.0;          // published - implied
};

struct ReconstructionResult {
  std::vector<ReferencePoint> references;
  std::vector<ThresholdAnomaly> anomalies;
};

namespace detail {

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

/// Recovers the QPSK reference point of every coding rate in `grid` from
/// the normalized capacities at the published thresholds.
///
/// Per rate, the consensus capacity is the median over the row's cells. A
/// cell whose published value sits more than `anomaly_tolerance_db` away
/// from the threshold implied by the consensus is reported and dropped, and
/// the consensus is recomputed from the remaining cells.
inline ReconstructionResult reconstruct_references(std::span<const PublishedCell> grid,
                                                   const IntegrationSpec& spec = {},
                                                   double anomaly_tolerance_db = 0.5) {
  constexpr std::size_t kMinConsistent = 3;
  std::vector<CodingRate> rates;
  for (const auto& cell : grid) {
    if (std::find(rates.begin(), rates.end(), cell.coding_rate) == rates.end()) rates.push_back(cell.coding_rate);
  }
  std::sort(rates.begin(), rates.end());

  const Constellation qpsk = build_reference(ModulationId::kQpsk);
  std::map<double, Constellation> cache;
  auto constellation_for = [&](double alpha) -> const Constellation& {
    auto it = cache.find(alpha);
    if (it == cache.end()) it = cache.emplace(alpha, build_hierarchical_16qam(alpha)).first;
    return it->second;
  };

  ReconstructionResult result;
  for (const CodingRate rate : rates) {
    std::vector<const PublishedCell*> cells;
    std::vector<double> capacities;
    for (const auto& cell : grid) {
      if (!(cell.coding_rate == rate)) continue;
      cells.push_back(&cell);
      capacities.push_back(normalized_capacity(constellation_for(cell.alpha), cell.stream, cell.threshold_db, spec));
    }
    const double consensus = detail::median(capacities);

    std::vector<double> consistent;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const double implied = inverse_capacity(constellation_for(cells[i]->alpha), cells[i]->stream, consensus, spec);
      const double deviation = cells[i]->threshold_db - implied;
      if (std::abs(deviation) > anomaly_tolerance_db) {
        result.anomalies.push_back({*cells[i], implied, deviation});
      } else {
        consistent.push_back(capacities[i]);
      }
    }
    if (consistent.size() < kMinConsistent) {
      throw ReconstructionFailed(rate.to_string(),
                                 fmt::format("only {} consistent cells for rate {}", consistent.size(),
                                             rate.to_string()));
    }
    const double refined = detail::median(consistent);
    result.references.push_back(
        {rate, inverse_capacity(qpsk, Stream::kFull, refined, spec), ReferenceSource::kReconstructed});
  }
  return result;
}

/// Builds the full modcod menu: QPSK and uniform 16-QAM (FULL stream) plus
/// the HP and LP streams of the hierarchical 16-QAM for each alpha, over
/// every coding rate of `references`. `pilot_offset_db` is added to every
/// threshold.
inline ModCodTable build_modcod_table(std::span<const double> alphas, std::span<const ReferencePoint> references,
                                      double pilot_offset_db = 0.0, const IntegrationSpec& spec = {}) {
  for (const CodingRate rate : kCodingRates) {
    const bool present = std::any_of(references.begin(), references.end(),
                                     [&](const ReferencePoint& r) { return r.coding_rate == rate; });
    if (!present) throw ConfigurationError(fmt::format("no QPSK reference point for rate {}", rate.to_string()));
  }
  spec.validate();

  const Constellation uniform = build_reference(ModulationId::kUniform16Qam);
  std::vector<Constellation> hierarchical;
  for (double a : alphas) hierarchical.push_back(build_hierarchical_16qam(a));

  ModCodTable table;
  table.pilot_offset_db = pilot_offset_db;
  auto add = [&](ModulationId mod, std::optional<double> alpha, Stream stream, CodingRate rate, int bits,
                 double threshold) {
    table.entries.push_back({mod, alpha, stream, rate, bits * rate.value(), threshold + pilot_offset_db});
  };

  for (const auto& ref : references) {
    const CodingRate rate = ref.coding_rate;
    const double target = reference_normalized_capacity(ref, spec);
    // QPSK is the reference modulation: its threshold is the operating point itself.
    add(ModulationId::kQpsk, std::nullopt, Stream::kFull, rate, 2, ref.qpsk_es_n0_db);
    add(ModulationId::kUniform16Qam, std::nullopt, Stream::kFull, rate, 4,
        inverse_capacity(uniform, Stream::kFull, target, spec));
    for (std::size_t i = 0; i < hierarchical.size(); ++i) {
      add(ModulationId::kHierarchical16Qam, alphas[i], Stream::kHp, rate, 2,
          inverse_capacity(hierarchical[i], Stream::kHp, target, spec));
      add(ModulationId::kHierarchical16Qam, alphas[i], Stream::kLp, rate, 2,
          inverse_capacity(hierarchical[i], Stream::kLp, target, spec));
    }
  }
  return table;
}

}  // namespace hmts
