#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "seongdo/digest.hpp"
#include "seongdo/ingest.hpp"
#include "support.hpp"

namespace seongdo {
namespace {

CatalogParse parse_text(const std::string& body, CatalogFormat f = CatalogFormat::kHipparcosLike) {
  std::istringstream in(body);
  return parse_catalog(in, f, "<test>");
}

CrossRefParse xref_text(const std::string& body) {
  std::istringstream in(body);
  return parse_crossref(in, "<test>");
}

std::string hip_rows(int n, int first_hip = 1) {
  std::string s = "hip,ra,dec,plx,vmag\n";
  for (int i = 0; i < n; ++i) {
    s += std::to_string(first_hip + i) + "," + std::to_string(3.5 * i) + "," + std::to_string(-80.0 + 1.6 * i) +
         ",12.5,6.1\n";
  }
  return s;
}

void expect_conserved(const IngestReport& r) { EXPECT_EQ(r.rows_read, r.rows_accepted + r.rows_rejected); }

TEST(ParseCatalog, HundredCleanRows) {
  const auto p = parse_text(hip_rows(100));
  EXPECT_EQ(p.rows.size(), 100u);
  EXPECT_EQ(p.report.rows_rejected, 0u);
  EXPECT_EQ(p.report.rows_read, 100u);
  EXPECT_EQ(p.rows[7].source_id, 8u);
  EXPECT_EQ(*p.rows[7].hip_id, 8u);
  EXPECT_EQ(p.rows[7].source_catalog, CatalogFormat::kHipparcosLike);
}

TEST(ParseCatalog, DeclinationOutOfRangeRejected) {
  std::string body = hip_rows(20);
  body += "900,10,95.0,1,1\n901,11,95.0,1,1\n902,12,95.0,1,1\n";
  const auto p = parse_text(body);
  EXPECT_EQ(p.report.rows_accepted, 20u);
  EXPECT_EQ(p.report.reject_reasons.at("dec_out_of_range"), 3u);
  expect_conserved(p.report);
}

TEST(ParseCatalog, DeclinationBoundsAreClosed) {
  const auto p = parse_text("hip,ra,dec,plx,vmag\n1,0,90,1,1\n2,0,-90,1,1\n3,0,90.0000001,1,1\n");
  EXPECT_EQ(p.report.rows_accepted, 2u);
  EXPECT_EQ(p.report.reject_reasons.at("dec_out_of_range"), 1u);
}

TEST(ParseCatalog, RaWrapWindow) {
  const auto p = parse_text(
      "hip,ra,dec,plx,vmag\n1,-10,0,1,1\n2,-360,0,1,1\n3,360,0,1,1\n4,719.5,0,1,1\n5,720,0,1,1\n6,-360.5,0,1,1\n"
      "7,359.999,0,1,1\n");
  ASSERT_EQ(p.rows.size(), 5u);
  EXPECT_DOUBLE_EQ(p.rows[0].ra_deg, 350.0);
  EXPECT_DOUBLE_EQ(p.rows[1].ra_deg, 0.0);
  EXPECT_DOUBLE_EQ(p.rows[2].ra_deg, 0.0);
  EXPECT_DOUBLE_EQ(p.rows[3].ra_deg, 359.5);
  EXPECT_DOUBLE_EQ(p.rows[4].ra_deg, 359.999);
  EXPECT_EQ(p.report.warnings.at("ra_wrapped"), 4u);
  EXPECT_EQ(p.report.reject_reasons.at("ra_out_of_range"), 2u);
  for (const auto& r : p.rows) {
    EXPECT_GE(r.ra_deg, 0.0);
    EXPECT_LT(r.ra_deg, 360.0);
  }
}

TEST(ParseCatalog, RejectReasons) {
  const auto p = parse_text(
      "hip,ra,dec,plx,vmag\n"
      "1,1,2,3\n"           // field count
      ",1,2,3,4\n"          // missing id
      "3,abc,2,3,4\n"       // unparseable
      "4,1,2,3,nan\n"       // non-finite magnitude
      "5,1,2,inf,4\n"       // non-finite parallax
      "6,1,2,3,4\n"
      "6,1,2,3,4\n"         // duplicate id
      "7,1,2,,4\n");        // missing parallax is accepted here
  EXPECT_EQ(p.report.rows_read, 8u);
  EXPECT_EQ(p.report.rows_accepted, 2u);
  const std::map<std::string, std::size_t> want{
      {"field_count", 1}, {"missing_field", 1}, {"unparseable_field", 1}, {"non_finite_magnitude", 1},
      {"non_finite_parallax", 1}, {"duplicate_source_id", 1}};
  EXPECT_EQ(p.report.reject_reasons, want);
  EXPECT_FALSE(p.rows[1].parallax_mas.has_value());
  ASSERT_FALSE(p.report.samples.empty());
  EXPECT_EQ(p.report.samples.front().line, 2u);
}

TEST(ParseCatalog, AnyFiniteMagnitudeAccepted) {
  const auto p = parse_text("hip,ra,dec,plx,vmag\n1,1,2,3,-27.5\n2,1,2,3,99\n");
  EXPECT_EQ(p.rows.size(), 2u);
}

TEST(ParseCatalog, HeaderMismatchIsFatal) {
  EXPECT_THROW(parse_text("hip,ra,dec,plx,vmag\n1,1,1,1,1\n", CatalogFormat::kGaiaLike), DataError);
  EXPECT_THROW(parse_text("source_id,ra,dec,parallax,phot_g_mean_mag\n"), DataError);
  EXPECT_THROW(parse_text("HIP,ra,dec,plx,vmag\n"), DataError);
  EXPECT_THROW(parse_text(""), DataError);
}

TEST(ParseCatalog, MissingFileIsIoError) {
  EXPECT_THROW(parse_catalog(std::filesystem::path("/nonexistent/x.csv"), CatalogFormat::kGaiaLike), IoError);
}

TEST(ParseCatalog, CrlfAndBomAccepted) {
  const auto p = parse_text("\xEF\xBB\xBFhip,ra,dec,plx,vmag\r\n1,10.5,2,3,4\r\n\r\n2,11,2,3,4\r\n");
  ASSERT_EQ(p.rows.size(), 2u);
  EXPECT_DOUBLE_EQ(p.rows[0].ra_deg, 10.5);
  EXPECT_EQ(p.rows[1].apparent_mag, 4.0);
}

TEST(ParseCatalog, GaiaOptionalHipColumn) {
  const auto plain = parse_text("source_id,ra,dec,parallax,phot_g_mean_mag\n42,1,2,3,4\n", CatalogFormat::kGaiaLike);
  ASSERT_EQ(plain.rows.size(), 1u);
  EXPECT_FALSE(plain.rows[0].hip_id);
  const auto linked = parse_text("source_id,ra,dec,parallax,phot_g_mean_mag,hip\n42,1,2,3,4,777\n43,1,2,3,4,\n",
                                 CatalogFormat::kGaiaLike);
  ASSERT_EQ(linked.rows.size(), 2u);
  EXPECT_EQ(*linked.rows[0].hip_id, 777u);
  EXPECT_FALSE(linked.rows[1].hip_id);
}

// Oracle: tests/oracles/catalog_oracle.py (5000 lines, 14 malformed).
TEST(ParseCatalog, BundledHipparcosMatchesLineCountOracle) {
  const auto& p = testing::bundled().hip;
  EXPECT_EQ(p.report.rows_read, 5000u);
  EXPECT_EQ(p.report.rows_rejected, 14u);
  EXPECT_EQ(p.report.rows_accepted, 5000u - 14u);
  EXPECT_EQ(p.rows.size(), 4986u);
  expect_conserved(p.report);
  const auto& g = testing::bundled().gaia;
  EXPECT_EQ(g.report.rows_accepted, 3000u - 3u);
}

TEST(Filter, SignTest) {
  std::vector<RawCatalogRow> rows;
  for (double plx : {5.0, 0.0, -1.2, 10.0}) rows.push_back({CatalogFormat::kHipparcosLike, rows.size() + 1, 0, 0, plx, 1, {}, 0});
  const auto f = filter_positive_parallax(rows);
  ASSERT_EQ(f.rows.size(), 2u);
  EXPECT_EQ(f.count_removed(), 2u);
  EXPECT_EQ(*f.rows[0].parallax_mas, 5.0);
  EXPECT_EQ(*f.rows[1].parallax_mas, 10.0);
}

TEST(Filter, AllPositiveIsIdentity) {
  const auto p = parse_text(hip_rows(50));
  const auto f = filter_positive_parallax(p.rows);
  EXPECT_EQ(f.count_removed(), 0u);
  EXPECT_EQ(f.rows.size(), 50u);
}

TEST(Filter, MissingCountedSeparately) {
  const auto p = parse_text("hip,ra,dec,plx,vmag\n1,1,2,,4\n2,1,2,-0.0,4\n3,1,2,1e-9,4\n");
  const auto f = filter_positive_parallax(p.rows);
  EXPECT_EQ(f.removed_missing, 1u);
  EXPECT_EQ(f.removed_non_positive, 1u);
  ASSERT_EQ(f.rows.size(), 1u);
  EXPECT_EQ(f.rows[0].source_id, 3u);
  EXPECT_EQ(f.removed_hip_ids, (std::vector<std::uint32_t>{1, 2}));
}

std::string sorted_id_digest(const std::vector<RawCatalogRow>& rows) {
  std::vector<std::uint64_t> ids;
  for (const auto& r : rows) ids.push_back(r.source_id);
  std::sort(ids.begin(), ids.end());
  std::string joined;
  for (auto id : ids) joined += (joined.empty() ? "" : ",") + std::to_string(id);
  return sha256_hex(joined);
}

// Oracle: tests/oracles/catalog_oracle.py full scan.
TEST(Filter, BundledKeptSetMatchesFullScanOracle) {
  const auto& b = testing::bundled();
  EXPECT_EQ(b.hip_kept.rows.size(), 4789u);
  EXPECT_EQ(b.hip_kept.removed_non_positive, 153u);
  EXPECT_EQ(b.hip_kept.removed_missing, 44u);
  EXPECT_EQ(sorted_id_digest(b.hip_kept.rows), "28817fb6dd9fcfbc6239ce663b1bb24ae567631ee561571f65ee261b757a4312");
  EXPECT_EQ(b.gaia_kept.rows.size(), 2846u);
  EXPECT_EQ(b.gaia_kept.removed_non_positive, 151u);
  EXPECT_EQ(sorted_id_digest(b.gaia_kept.rows), "29f0bb3635f62bd3fe139a9315d328e43f52aaae7a99fa4834c579059fef4429");
  // Cardinality law.
  EXPECT_EQ(b.hip_kept.rows.size() + b.hip_kept.count_removed(), b.hip.rows.size());
}

TEST(Filter, Idempotent) {
  const auto& b = testing::bundled();
  const auto once = filter_positive_parallax(b.hip.rows);
  const auto twice = filter_positive_parallax(once.rows);
  EXPECT_EQ(twice.count_removed(), 0u);
  ASSERT_EQ(twice.rows.size(), once.rows.size());
  for (std::size_t i = 0; i < once.rows.size(); ++i) EXPECT_EQ(twice.rows[i], once.rows[i]);
}

// Random catalogs with random defects.
std::vector<std::string> random_lines(std::mt19937_64& gen, int n) {
  std::uniform_int_distribution<int> kind(0, 9);
  std::uniform_real_distribution<double> u(-400.0, 800.0);
  std::vector<std::string> lines;
  for (int i = 0; i < n; ++i) {
    const std::string id = std::to_string(1000 + i);
    switch (kind(gen)) {
      case 0: lines.push_back(id + ",1,2\n"); break;
      case 1: lines.push_back(id + ",x,2,3,4\n"); break;
      case 2: lines.push_back(id + "," + std::to_string(u(gen)) + ",0,1,1\n"); break;
      case 3: lines.push_back(id + ",10," + std::to_string(u(gen) / 4) + ",1,1\n"); break;
      case 4: lines.push_back(id + ",10,10,,1\n"); break;
      case 5: lines.push_back(id + ",10,10,-3,1\n"); break;
      default: lines.push_back(id + "," + std::to_string(std::abs(u(gen)) / 3) + ",5,2.5,7\n"); break;
    }
  }
  return lines;
}

TEST(ParseCatalogProperty, ConservationOnRandomDefects) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::string body = "hip,ra,dec,plx,vmag\n";
    for (const auto& l : random_lines(gen, 200)) body += l;
    const auto p = parse_text(body);
    expect_conserved(p.report);
    std::size_t hist = 0;
    for (const auto& [k, v] : p.report.reject_reasons) hist += v;
    EXPECT_EQ(hist, p.report.rows_rejected);
    EXPECT_EQ(p.rows.size(), p.report.rows_accepted);
  }
}

TEST(ParseCatalogProperty, OrderIndependent) {
  std::mt19937_64 gen(12);
  auto lines = random_lines(gen, 500);
  auto decide = [](const std::vector<std::string>& ls) {
    std::string body = "hip,ra,dec,plx,vmag\n";
    for (const auto& l : ls) body += l;
    const auto p = parse_text(body);
    std::map<std::uint64_t, RawCatalogRow> by_id;
    for (auto r : p.rows) {
      r.line = 0;
      by_id.emplace(r.source_id, r);
    }
    return std::pair{by_id, p.report.reject_reasons};
  };
  const auto base = decide(lines);
  for (int k = 0; k < 5; ++k) {
    std::shuffle(lines.begin(), lines.end(), gen);
    const auto permuted = decide(lines);
    EXPECT_EQ(permuted.first, base.first);
    EXPECT_EQ(permuted.second, base.second);
  }
}

TEST(CrossRef, DistinctPairs) {
  const auto x = xref_text("hr,hip\n1,88\n2,122\n");
  EXPECT_EQ(x.table.size(), 2u);
  EXPECT_EQ(*x.table.hip_for(1), 88u);
  EXPECT_EQ(*x.table.hip_for(2), 122u);
  EXPECT_FALSE(x.table.hip_for(3));
}

TEST(CrossRef, IdenticalDuplicateDeduplicatedWithWarning) {
  const auto x = xref_text("hr,hip\n1,88\n1,88\n");
  EXPECT_EQ(x.table.size(), 1u);
  EXPECT_EQ(x.table.duplicates(), 1u);
  EXPECT_EQ(x.report.warnings.at("duplicate_pair"), 1u);
}

TEST(CrossRef, ConflictIsFatal) {
  EXPECT_THROW(xref_text("hr,hip\n1,88\n1,99\n"), DataError);
}

TEST(CrossRef, MalformedRowRejectedAndReported) {
  const auto x = xref_text("hr,hip\n1,88\n2,abc\n3\n,4\n");
  EXPECT_EQ(x.table.size(), 1u);
  EXPECT_EQ(x.report.rows_rejected, 3u);
  expect_conserved(x.report);
  EXPECT_THROW(xref_text("hip,hr\n"), DataError);
}

TEST(CrossRef, BundledFile) {
  const auto& x = testing::bundled().xref;
  EXPECT_EQ(x.table.size(), 931u);
  EXPECT_EQ(x.table.duplicates(), 1u);
  EXPECT_EQ(x.report.rows_rejected, 1u);
  EXPECT_EQ(*x.table.hip_for(4301), 54061u);
}

TEST(IngestReport, JsonCarriesHistogram) {
  const auto p = parse_text("hip,ra,dec,plx,vmag\n1,1,95,1,1\n2,1,1,1,1\n");
  const auto j = to_json(p.report);
  EXPECT_EQ(j["rows_read"], 2);
  EXPECT_EQ(j["rows_accepted"], 1);
  EXPECT_EQ(j["reject_reasons"]["dec_out_of_range"], 1);
}

}  // namespace
}  // namespace seongdo
