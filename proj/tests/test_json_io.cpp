/*
 * Copyright 2026 The KIRO Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include "kiro/error.hpp"
#include "kiro/ingestion.hpp"
#include "kiro/json_io.hpp"
#include "support.hpp"

namespace kiro::json_io {
namespace {

using kiro::testing::april_2021;
using kiro::testing::make_snapshot;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no kiro::Error thrown";
  return ErrorCode::InvalidArgument;
}

WikiSnapshot rich_snapshot() {
  auto s = make_snapshot("ja", 1300000, {{"JP", 900.0}, {"US", 12.5}}, {{"JP", 5e6}, {"US", 1e5}});
  s.site_stats.stub_articles = 12345;
  s.group_counts = {{"sysop", 41}, {std::string(kElevatedAny), 60}};
  s.governance_stats.abusefilter_rules = 30;
  s.governance_stats.blocked_accounts = 200;
  s.governance_stats.total_accounts = 10000;
  s.external_scores["ores_quality"] = {{"mean_quality", 0.42}};
  s.warnings = {"abuse_filters: not available on this wiki"};
  s.fixture_origin = true;
  return s;
}

TEST(Canonical, SortedCompactAndTwelveDigits) {
  const Json j = {{"b", 1}, {"a", {{"z", 0.1 + 0.2}, {"y", 0.0}}}};
  EXPECT_EQ(canonical_dump(j), R"({"a":{"y":0,"z":0.3},"b":1})");
  EXPECT_EQ(format_real(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_real(2.5e-7), "2.5e-07");
  EXPECT_EQ(format_real(0.0), "0");
}

TEST(Canonical, StableAcrossReparse) {
  const std::string once = canonical_dump(to_json(rich_snapshot()));
  EXPECT_EQ(canonical_dump(parse(once, "test")), once);
}

TEST(Snapshots, RoundTrip) {
  const auto s = rich_snapshot();
  EXPECT_EQ(snapshot_from_json(to_json(s)), s);
  auto plain = s;
  plain.fixture_origin = false;
  EXPECT_EQ(snapshot_from_json(to_json(plain, false)), plain);
}

TEST(Snapshots, RejectsOtherSchemaVersions) {
  Json j = to_json(rich_snapshot());
  j["schema_version"] = 0;
  EXPECT_EQ(code_of([&] { snapshot_from_json(j); }), ErrorCode::SchemaVersionMismatch);
  j["schema_version"] = 2;
  EXPECT_EQ(code_of([&] { snapshot_from_json(j); }), ErrorCode::SchemaVersionMismatch);
}

TEST(Snapshots, RejectsMissingAndMistypedFields) {
  Json j = to_json(rich_snapshot());
  j.erase("site_stats");
  EXPECT_EQ(code_of([&] { snapshot_from_json(j); }), ErrorCode::ParseError);
  j = to_json(rich_snapshot());
  j["window"] = 2021;
  EXPECT_EQ(code_of([&] { snapshot_from_json(j); }), ErrorCode::ParseError);
}

TEST(Parsing, TruncatedDocumentIsParseError) {
  const std::string text = canonical_dump(to_json(rich_snapshot()));
  EXPECT_EQ(code_of([&] { parse(text.substr(0, text.size() / 2), "truncated"); }), ErrorCode::ParseError);
}

TEST(Windows, RoundTrip) {
  const auto w = MonthWindow::parse("2021-01_2021-04");
  EXPECT_EQ(window_from_json(to_json(w)), w);
}

TEST(IndicatorValues, RoundTripEveryPayloadKind) {
  IndicatorValue count;
  count.indicator_id = "articles";
  count.wiki = WikiId{"ja"};
  count.window = april_2021();
  count.kind = ValueKind::Count;
  count.value = std::uint64_t{1300000};
  count.provenance.snapshot_ids = {"ja/2021-04@2021-05-01T00:00:00Z"};
  count.provenance.computed_at = parse_timestamp("2021-05-01T00:00:00Z");

  IndicatorValue ratio = count;
  ratio.indicator_id = "stub_ratio";
  ratio.kind = ValueKind::Ratio;
  ratio.value = 0.25;

  IndicatorValue dist = count;
  dist.indicator_id = "views_by_country";
  dist.kind = ValueKind::Distribution;
  dist.value = Distribution{{"JP", 0.75}, {"US", 0.25}};

  IndicatorValue ent = count;
  ent.indicator_id = "views_by_country_entropy";
  ent.kind = ValueKind::Entropy;
  ent.value = metrics::EntropyValue{0.5, 2, metrics::LogBase::Natural};
  ent.provenance.log_base = metrics::LogBase::Natural;

  for (const auto& v : {count, ratio, dist, ent}) {
    EXPECT_EQ(indicator_value_from_json(to_json(v)), v) << v.indicator_id;
  }
  const auto doc = indicators_document(WikiId{"ja"}, april_2021(), {count, ratio});
  EXPECT_EQ(values_from_document(doc), (std::vector<IndicatorValue>{count, ratio}));
}

TEST(Registry, DefinitionsRoundTrip) {
  for (const auto& d : default_registry().definitions()) {
    EXPECT_EQ(indicator_definition_from_json(to_json(d)), d) << d.id;
  }
  EXPECT_EQ(taxonomy_json().at("categories").size(), 8u);
}

TEST(CategoryScores, RoundTrip) {
  CategoryRiskScore s;
  s.wiki = WikiId{"ja"};
  s.category = RiskCategory::CommunityDemographics;
  s.score = 0.625;
  s.contributing = {{"views_by_country_entropy", 0.625}};
  s.cohort = {"ar", "en", "ja"};
  s.coverage = 0.5;
  EXPECT_EQ(category_score_from_json(to_json(s)), s);
}

TEST(Fixtures, BundledJapaneseSnapshotLoads) {
  const auto path = kiro::testing::fixtures_dir() / ingest::fixture_file_name(WikiId{"ja"}, april_2021());
  const auto s = ingest::load_fixture_snapshot(path);
  EXPECT_TRUE(s.fixture_origin);
  EXPECT_GT(s.site_stats.articles, 500000u);
  EXPECT_TRUE(s.summed(CountrySubject::Views).has_value());
  EXPECT_TRUE(s.summed(CountrySubject::Edits).has_value());
}

TEST(Fixtures, MissingFileIsFileNotFound) {
  EXPECT_EQ(code_of([] { ingest::load_fixture_snapshot("/nonexistent/xx.snapshot.json"); }),
            ErrorCode::FileNotFound);
}

}  // namespace
}  // namespace kiro::json_io
