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

#include <sstream>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace hmts;
using hmts::testing::shipped_table;

namespace {

ReferencePoint reference_for(CodingRate rate) {
  for (const auto& r : shipped_references())
    if (r.coding_rate == rate) return r;
  throw std::logic_error("no reference");
}

const ReconstructionResult& published_reconstruction() {
  static const ReconstructionResult res = [] {
    const auto cells = published_hierarchical_thresholds();
    return reconstruct_references(cells);
  }();
  return res;
}

}  // namespace

TEST(CodingRate, ParseAndOrder) {
  EXPECT_EQ(CodingRate::parse("2/9"), (CodingRate{2, 9}));
  EXPECT_EQ((CodingRate{2, 4}), (CodingRate{1, 2}));
  EXPECT_LT((CodingRate{1, 5}), (CodingRate{2, 9}));
  EXPECT_THROW(CodingRate::parse("0.5"), ConfigurationError);
  EXPECT_THROW(CodingRate::parse("3/2"), ConfigurationError);
  for (std::size_t i = 0; i + 1 < kCodingRates.size(); ++i) EXPECT_LT(kCodingRates[i], kCodingRates[i + 1]);
}

TEST(DeriveThreshold, FirstRowOfPublishedTable) {
  const ReferencePoint ref{{1, 5}, -3.9, ReferenceSource::kPublished};
  EXPECT_NEAR(derive_threshold(build_hierarchical_16qam(1.0), Stream::kHp, {1, 5}, ref), -2.5, 0.15);
  EXPECT_NEAR(derive_threshold(build_hierarchical_16qam(4.0), Stream::kHp, {1, 5}, ref), -3.6, 0.15);
  EXPECT_NEAR(derive_threshold(build_hierarchical_16qam(0.5), Stream::kLp, {1, 5}, ref), 2.6, 0.15);
}

TEST(DeriveThreshold, RateMismatch) {
  const ReferencePoint ref{{1, 5}, -3.9, ReferenceSource::kPublished};
  EXPECT_THROW(derive_threshold(build_hierarchical_16qam(1.0), Stream::kHp, {1, 3}, ref), InvalidParameter);
}

TEST(ReconstructReferences, FirstRateNearPublishedAnchor) {
  const auto& res = published_reconstruction();
  ASSERT_EQ(res.references.size(), 8u);
  EXPECT_EQ(res.references.front().coding_rate, (CodingRate{1, 5}));
  EXPECT_NEAR(res.references.front().qpsk_es_n0_db, -3.9, 0.15);
  for (std::size_t i = 0; i + 1 < res.references.size(); ++i) {
    EXPECT_LT(res.references[i].qpsk_es_n0_db, res.references[i + 1].qpsk_es_n0_db);
  }
}

TEST(ReconstructReferences, FlagsInconsistentCells) {
  // The anomalous set was established by the row-consistency oracle: each of
  // these cells sits more than 0.5 dB away from the threshold implied by the
  // other cells of its row, every other cell within 0.2 dB.
  const auto& res = published_reconstruction();
  struct Expected {
    CodingRate rate;
    double alpha;
    Stream stream;
    double published;
  };
  const std::vector<Expected> expected{
      {{2, 5}, 2.0, Stream::kHp, 2.0},
      {{2, 5}, 2.0, Stream::kLp, 6.8},
      {{2, 5}, 1.0, Stream::kHp, 9.9},
      {{1, 2}, 2.0, Stream::kHp, 7.3},
  };
  ASSERT_EQ(res.anomalies.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& a = res.anomalies[i];
    EXPECT_EQ(a.cell.coding_rate, expected[i].rate);
    EXPECT_DOUBLE_EQ(a.cell.alpha, expected[i].alpha);
    EXPECT_EQ(a.cell.stream, expected[i].stream);
    EXPECT_DOUBLE_EQ(a.cell.threshold_db, expected[i].published);
    EXPECT_GT(std::abs(a.deviation_db), 0.5);
  }
}

TEST(ReconstructReferences, ShippedReferencesMatchReconstruction) {
  const auto& res = published_reconstruction();
  const auto shipped = shipped_references();
  ASSERT_EQ(shipped.size(), res.references.size());
  // 1/5 ships the published anchor; the others are rounded reconstructions.
  EXPECT_NEAR(shipped[0].qpsk_es_n0_db, res.references[0].qpsk_es_n0_db, 0.05);
  for (std::size_t i = 1; i < shipped.size(); ++i) {
    EXPECT_NEAR(shipped[i].qpsk_es_n0_db, res.references[i].qpsk_es_n0_db, 0.006);
  }
}

TEST(ReconstructReferences, SyntheticRoundTrip) {
  const std::vector<ReferencePoint> truth{{{2, 7}, -2.3, ReferenceSource::kPublished},
                                          {{1, 2}, 0.8, ReferenceSource::kPublished}};
  std::vector<PublishedCell> cells;
  for (const auto& ref : truth) {
    for (double alpha : kTableAlphas) {
      const auto c = build_hierarchical_16qam(alpha);
      for (Stream s : {Stream::kHp, Stream::kLp}) {
        cells.push_back({ref.coding_rate, alpha, s, derive_threshold(c, s, ref.coding_rate, ref)});
      }
    }
  }
  const auto res = reconstruct_references(cells);
  EXPECT_TRUE(res.anomalies.empty());
  ASSERT_EQ(res.references.size(), truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    EXPECT_NEAR(res.references[i].qpsk_es_n0_db, truth[i].qpsk_es_n0_db, 0.05);
  }
}

TEST(ReconstructReferences, FailsWithTooFewConsistentCells) {
  const std::vector<PublishedCell> cells{{{1, 5}, 1.0, Stream::kHp, -2.5}, {{1, 5}, 1.0, Stream::kLp, 3.7}};
  EXPECT_THROW(reconstruct_references(cells), ReconstructionFailed);
  try {
    reconstruct_references(cells);
  } catch (const ReconstructionFailed& e) {
    EXPECT_EQ(e.rate(), "1/5");
  }
}

TEST(ModCodTable, SpectralRates) {
  const auto& t = shipped_table();
  EXPECT_EQ(t.entries.size(), 8u * (2 + 2 * kTableAlphas.size()));
  const ModCod* qpsk = t.find(ModulationId::kQpsk, std::nullopt, Stream::kFull, {1, 3});
  ASSERT_NE(qpsk, nullptr);
  EXPECT_NEAR(qpsk->spectral_rate, 2.0 / 3.0, 1e-15);
  const ModCod* qam = t.find(ModulationId::kUniform16Qam, std::nullopt, Stream::kFull, {1, 2});
  ASSERT_NE(qam, nullptr);
  EXPECT_NEAR(qam->spectral_rate, 2.0, 1e-15);
  const ModCod* lp = t.find(ModulationId::kHierarchical16Qam, 0.8, Stream::kLp, {2, 5});
  ASSERT_NE(lp, nullptr);
  EXPECT_NEAR(lp->spectral_rate, 0.8, 1e-15);
}

TEST(ModCodTable, Uniform16QamAnchors) {
  // 8 dB decodes 1/2 but not 2/3, 6 dB decodes 2/5 but not 1/2, 4 dB decodes 1/3 but not 2/5.
  const auto& t = shipped_table();
  auto th = [&](CodingRate r) { return t.find(ModulationId::kUniform16Qam, std::nullopt, Stream::kFull, r)->threshold_db; };
  EXPECT_LE(th({1, 2}), 8.0);
  EXPECT_GT(th({2, 3}), 8.0);
  EXPECT_LE(th({2, 5}), 6.0);
  EXPECT_GT(th({1, 2}), 6.0);
  EXPECT_LE(th({1, 3}), 4.0);
  EXPECT_GT(th({2, 5}), 4.0);
}

TEST(ModCodTable, ThresholdsIncreaseWithCodingRate) {
  const auto& t = shipped_table();
  auto check = [&](ModulationId mod, std::optional<double> alpha, Stream s) {
    const auto fam = t.family(mod, alpha, s);
    ASSERT_EQ(fam.size(), 8u);
    for (std::size_t i = 0; i + 1 < fam.size(); ++i) EXPECT_LT(fam[i].threshold_db, fam[i + 1].threshold_db);
  };
  check(ModulationId::kQpsk, std::nullopt, Stream::kFull);
  check(ModulationId::kUniform16Qam, std::nullopt, Stream::kFull);
  for (double a : kTableAlphas) {
    check(ModulationId::kHierarchical16Qam, a, Stream::kHp);
    check(ModulationId::kHierarchical16Qam, a, Stream::kLp);
  }
}

TEST(ModCodTable, AlphaOrderingPerRate) {
  const auto& t = shipped_table();
  // kTableAlphas is decreasing: HP thresholds must increase along it, LP decrease.
  for (const CodingRate r : kCodingRates) {
    for (std::size_t i = 0; i + 1 < kTableAlphas.size(); ++i) {
      const auto* hp_big = t.find(ModulationId::kHierarchical16Qam, kTableAlphas[i], Stream::kHp, r);
      const auto* hp_small = t.find(ModulationId::kHierarchical16Qam, kTableAlphas[i + 1], Stream::kHp, r);
      const auto* lp_big = t.find(ModulationId::kHierarchical16Qam, kTableAlphas[i], Stream::kLp, r);
      const auto* lp_small = t.find(ModulationId::kHierarchical16Qam, kTableAlphas[i + 1], Stream::kLp, r);
      EXPECT_LT(hp_big->threshold_db, hp_small->threshold_db) << r.to_string();
      EXPECT_GT(lp_big->threshold_db, lp_small->threshold_db) << r.to_string();
    }
  }
}

TEST(ModCodTable, ReproducesPublishedNonStandardColumns) {
  const auto& t = shipped_table();
  const auto& anomalies = published_reconstruction().anomalies;
  for (const auto& cell : published_hierarchical_thresholds()) {
    if (cell.alpha > 1.0) continue;
    const bool excluded = std::any_of(anomalies.begin(), anomalies.end(), [&](const ThresholdAnomaly& a) {
      return a.cell.coding_rate == cell.coding_rate && a.cell.alpha == cell.alpha && a.cell.stream == cell.stream;
    });
    if (excluded) continue;
    const auto* e = t.find(ModulationId::kHierarchical16Qam, cell.alpha, cell.stream, cell.coding_rate);
    ASSERT_NE(e, nullptr);
    EXPECT_NEAR(e->threshold_db, cell.threshold_db, 0.3)
        << cell.coding_rate.to_string() << " alpha " << cell.alpha << ' ' << to_string(cell.stream);
  }
}

TEST(ModCodTable, PilotOffsetIsAdditive) {
  const std::array<double, 1> alphas{1.0};
  const auto refs = shipped_references();
  const auto base = build_modcod_table(alphas, refs, 0.0);
  const auto shifted = build_modcod_table(alphas, refs, 0.3);
  ASSERT_EQ(base.entries.size(), shifted.entries.size());
  EXPECT_DOUBLE_EQ(shifted.pilot_offset_db, 0.3);
  for (std::size_t i = 0; i < base.entries.size(); ++i) {
    EXPECT_NEAR(shifted.entries[i].threshold_db - base.entries[i].threshold_db, 0.3, 1e-12);
  }
}

TEST(ModCodTable, MissingReference) {
  auto refs = shipped_references();
  refs.erase(refs.begin() + 3);
  EXPECT_THROW(build_modcod_table(kTableAlphas, refs), ConfigurationError);
}

TEST(ModCodTable, CsvRoundTrip) {
  const auto& t = shipped_table();
  std::stringstream ss;
  write_table_csv(ss, t);
  const auto back = read_table_csv(ss);
  EXPECT_EQ(back.entries, t.entries);
}

TEST(References, CsvRoundTripAndShippedFile) {
  const auto refs = shipped_references();
  std::stringstream ss;
  write_references_csv(ss, refs);
  const auto back = read_references_csv(ss);
  ASSERT_EQ(back.size(), refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    EXPECT_EQ(back[i].coding_rate, refs[i].coding_rate);
    EXPECT_EQ(back[i].qpsk_es_n0_db, refs[i].qpsk_es_n0_db);
    EXPECT_EQ(back[i].source, ReferenceSource::kDataFile);
  }
  const auto file = load_references(std::string(HMTS_DATA_DIR) + "/qpsk_references.csv");
  ASSERT_EQ(file.size(), refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    EXPECT_EQ(file[i].coding_rate, refs[i].coding_rate);
    EXPECT_EQ(file[i].qpsk_es_n0_db, refs[i].qpsk_es_n0_db);
  }
}

TEST(References, RejectsBadFiles) {
  std::stringstream wrong_header("rate,snr\n1/5,-3.9\n");
  EXPECT_THROW(read_references_csv(wrong_header), ConfigurationError);
  std::stringstream bad_number("coding_rate,qpsk_es_n0_db\n1/5,abc\n");
  EXPECT_THROW(read_references_csv(bad_number), ConfigurationError);
  EXPECT_THROW(load_references("/nonexistent/refs.csv"), ConfigurationError);
}

TEST(ReferencePoint, DerivedFromReferenceCapacity) {
  // Derived QPSK threshold equals the reference point itself.
  const auto ref = reference_for({2, 5});
  EXPECT_NEAR(derive_threshold(build_reference(ModulationId::kQpsk), Stream::kFull, {2, 5}, ref),
              ref.qpsk_es_n0_db, 2e-3);
}
