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

#include <algorithm>
#include <cmath>

#include "kiro/error.hpp"
#include "kiro/ingestion.hpp"
#include "kiro/json_io.hpp"
#include "support.hpp"

namespace kiro::ingest {
namespace {

using kiro::testing::april_2021;
using kiro::testing::ScriptedTransport;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no kiro::Error thrown";
  return ErrorCode::InvalidArgument;
}

const std::string kApi = "https://xx.wikipedia.org/w/api.php?action=query&format=json&formatversion=2&";
const std::string kMetrics = "https://wikimedia.org/api/rest_v1/metrics/";
const std::string kSiteInfo = kApi + "meta=siteinfo&siprop=statistics";
const std::string kSiteInfoBody =
    R"({"batchcomplete":true,"query":{"statistics":{"pages":1500000,"articles":500123,"edits":900000000,)"
    R"("images":10,"users":2000000,"activeusers":4800,"admins":40}}})";

fetch::FetchPolicy policy() {
  fetch::FetchPolicy p;
  p.user_agent = "kiro-tests/1.0 (ops@example.org)";
  return p;
}

std::string users_page(int n, int offset, const std::string& cont = "") {
  json_io::Json rows = json_io::Json::array();
  for (int i = 0; i < n; ++i) rows.push_back({{"userid", offset + i}, {"name", "U" + std::to_string(offset + i)}});
  json_io::Json j{{"query", {{"allusers", rows}}}};
  if (!cont.empty()) j["continue"] = {{"aufrom", cont}, {"continue", "-||"}};
  return j.dump();
}

struct Harness {
  ScriptedTransport transport;
  fetch::ManualClock clock{parse_timestamp("2021-05-01T00:00:00Z")};
  Ingestor ingestor{transport, clock, policy()};
  WikiId wiki{"xx"};
};

TEST(Buckets, ExactAndGeometricMidpoint) {
  EXPECT_DOUBLE_EQ(bucket_estimate("42").estimate, 42.0);
  const auto b = bucket_estimate("100..999");
  EXPECT_EQ(b.lo, 100u);
  EXPECT_EQ(b.hi, 999u);
  EXPECT_NEAR(b.estimate, 316.06961258558215, 1e-12);
  EXPECT_DOUBLE_EQ(bucket_estimate("1..1").estimate, 1.0);
  EXPECT_EQ(code_of([] { bucket_estimate("0..5"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { bucket_estimate("9..5"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { bucket_estimate("many"); }), ErrorCode::ParseError);
}

TEST(SiteInfo, ParsesCannedPayload) {
  const auto s = parse_site_statistics(kSiteInfoBody);
  EXPECT_EQ(s.articles, 500123u);
  EXPECT_EQ(s.total_pages, 1500000u);
  EXPECT_EQ(s.edits, 900000000u);
  EXPECT_EQ(s.editors, 2000000u);
  EXPECT_EQ(s.active_editors, 4800u);
}

TEST(SiteInfo, MissingFieldIsParseError) {
  std::string body = kSiteInfoBody;
  body.replace(body.find("\"activeusers\":4800,"), 19, "");
  EXPECT_EQ(code_of([&] { parse_site_statistics(body); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_site_statistics(R"({"error":{"code":"internal"}})"); }), ErrorCode::ParseError);
}

TEST(SiteInfo, FetchMapsStatuses) {
  Harness h;
  h.transport.add(kSiteInfo, 200, kSiteInfoBody);
  EXPECT_EQ(h.ingestor.fetch_site_statistics(h.wiki).articles, 500123u);

  Harness missing;  // unscripted: 404
  EXPECT_EQ(code_of([&] { missing.ingestor.fetch_site_statistics(missing.wiki); }), ErrorCode::UnknownWiki);

  Harness down;
  down.transport.add(kSiteInfo, 503, "");
  EXPECT_EQ(code_of([&] { down.ingestor.fetch_site_statistics(down.wiki); }), ErrorCode::NetworkError);
}

TEST(SiteInfo, StubCategoryCountIsAttached) {
  Harness h;
  h.transport.add(kSiteInfo, 200, kSiteInfoBody);
  h.transport.add(kApi + "prop=categoryinfo&titles=Category%3AStubs", 200,
                  R"({"query":{"pages":[{"title":"Category:Stubs","categoryinfo":{"size":1200,"pages":1100}}]}})");
  EXPECT_EQ(h.ingestor.fetch_site_statistics(h.wiki, std::string("Category:Stubs")).stub_articles, 1100u);
}

TEST(UserGroups, FollowsContinuationAcrossPages) {
  Harness h;
  const std::string q = kApi + "list=allusers&augroup=sysop&aulimit=500";
  h.transport.add(q, 200, users_page(50, 0, "U50"));
  h.transport.add(q + "&aufrom=U50&continue=-%7C%7C", 200, users_page(50, 50, "U100"));
  h.transport.add(q + "&aufrom=U100&continue=-%7C%7C", 200, users_page(12, 100));
  h.transport.add(kApi + "list=allusers&augroup=bureaucrat&aulimit=500", 200,
                  R"({"error":{"code":"badvalue","info":"Unrecognized value for parameter augroup"}})");
  const auto counts = h.ingestor.fetch_user_group_counts(h.wiki, {"sysop", "bureaucrat"});
  EXPECT_EQ(counts.at("sysop"), 112u);
  EXPECT_EQ(counts.at("bureaucrat"), 0u);  // group absent on this wiki
}

TEST(UserGroups, EmptyGroupSetRejected) {
  Harness h;
  EXPECT_EQ(code_of([&] { h.ingestor.fetch_user_group_counts(h.wiki, {}); }), ErrorCode::InvalidArgument);
}

TEST(Governance, CountsEnabledFiltersAndBlocks) {
  Harness h;
  json_io::Json filters = json_io::Json::array();
  for (int i = 0; i < 48; ++i) {
    json_io::Json f{{"id", i}};
    if (i < 41) f["enabled"] = true;
    filters.push_back(f);
  }
  h.transport.add(kApi + "list=abusefilters&abfprop=id%7Cstatus&abflimit=500", 200,
                  json_io::Json{{"query", {{"abusefilters", filters}}}}.dump());
  json_io::Json blocks = json_io::Json::array();
  for (int i = 0; i < 230; ++i) blocks.push_back({{"id", i}, {"user", "B" + std::to_string(i)}});
  h.transport.add(kApi + "list=blocks&bkprop=id%7Cuser&bkshow=account&bklimit=500", 200,
                  json_io::Json{{"query", {{"blocks", blocks}}}}.dump());
  const auto g = h.ingestor.fetch_governance_stats(h.wiki, 10000);
  EXPECT_EQ(g.abusefilter_rules, 41u);
  EXPECT_EQ(g.blocked_accounts, 230u);
  EXPECT_EQ(g.total_accounts, 10000u);
}

TEST(Governance, MissingFilterModuleIsAbsentNotZero) {
  Harness h;
  h.transport.add(kApi + "list=abusefilters&abfprop=id%7Cstatus&abflimit=500", 200,
                  R"({"error":{"code":"badvalue","info":"Unrecognized value for parameter list"}})");
  h.transport.add(kApi + "list=blocks&bkprop=id%7Cuser&bkshow=account&bklimit=500", 200,
                  R"({"query":{"blocks":[]}})");
  const auto g = h.ingestor.fetch_governance_stats(h.wiki, 10);
  EXPECT_FALSE(g.abusefilter_rules.has_value());
  EXPECT_EQ(g.blocked_accounts, 0u);
}

TEST(Countries, ViewsParseAndSkipUnknownBucket) {
  const auto d = parse_views_by_country(
      R"({"items":[{"countries":[{"country":"JP","views":9000,"rank":1},{"country":"--","views":5},)"
      R"({"country":"US","views":"100..999","rank":2}]}]})",
      Month{2021, 4});
  EXPECT_EQ(d.subject, CountrySubject::Views);
  EXPECT_EQ(d.window, april_2021());
  EXPECT_EQ(d.entries.size(), 2u);
  EXPECT_DOUBLE_EQ(d.entries.at("JP"), 9000.0);
  EXPECT_NEAR(d.entries.at("US"), std::sqrt(100.0 * 999.0), 1e-9);
}

TEST(Countries, DuplicateCountryIsParseError) {
  EXPECT_EQ(code_of([] {
              parse_edits_by_country(
                  R"({"items":[{"results":[{"country":"JP","edits":1},{"country":"JP","edits":2}]}]})",
                  Month{2021, 4});
            }),
            ErrorCode::ParseError);
  EXPECT_EQ(code_of([] {
              parse_edits_by_country(R"({"items":[{"results":[{"country":"jp","edits":1}]}]})", Month{2021, 4});
            }),
            ErrorCode::ParseError);
}

TEST(Countries, EmptyListIsNoData) {
  EXPECT_EQ(code_of([] { parse_views_by_country(R"({"items":[]})", Month{2021, 4}); }), ErrorCode::NoData);
  EXPECT_EQ(code_of([] { parse_editors_by_country(R"({"items":[{"results":[]}]})", Month{2021, 4}); }),
            ErrorCode::NoData);
}

TEST(Countries, EditorBucketsUseEstimates) {
  const auto d = parse_editors_by_country(
      R"({"items":[{"results":[{"country":"EG","editors":"5..9"},{"country":"SA","editors":3}]}]})",
      Month{2021, 4});
  EXPECT_EQ(d.subject, CountrySubject::ActiveEditors);
  EXPECT_NEAR(d.entries.at("EG"), std::sqrt(45.0), 1e-12);
  EXPECT_DOUBLE_EQ(d.entries.at("SA"), 3.0);
}

TEST(Countries, Fetch404IsNoData) {
  Harness h;
  EXPECT_EQ(code_of([&] { h.ingestor.fetch_views_by_country(h.wiki, Month{2021, 4}); }), ErrorCode::NoData);
  h.transport.add(kMetrics + "pageviews/top-by-country/xx.wikipedia/all-access/2021/04", 200,
                  R"({"items":[{"countries":[{"country":"FR","views":10}]}]})");
  EXPECT_DOUBLE_EQ(h.ingestor.fetch_views_by_country(h.wiki, Month{2021, 4}).entries.at("FR"), 10.0);
}

TEST(Snapshot, SiteStatisticsFailureIsHard) {
  Harness h;
  EXPECT_EQ(code_of([&] { h.ingestor.snapshot_wiki(h.wiki, april_2021()); }), ErrorCode::HardFailure);
}

TEST(Snapshot, OtherFailuresBecomeWarnings) {
  Harness h;
  h.transport.add(kSiteInfo, 200, kSiteInfoBody);
  h.transport.add(kMetrics + "pageviews/top-by-country/xx.wikipedia/all-access/2021/04", 200,
                  R"({"items":[{"countries":[{"country":"FR","views":10}]}]})");
  const auto r = h.ingestor.snapshot_wiki(h.wiki, april_2021());
  EXPECT_EQ(r.snapshot.site_stats.articles, 500123u);
  EXPECT_TRUE(r.snapshot.summed(CountrySubject::Views).has_value());
  EXPECT_FALSE(r.snapshot.summed(CountrySubject::Edits).has_value());
  EXPECT_FALSE(r.snapshot.fixture_origin);
  bool editors_warning = false;
  for (const auto& w : r.snapshot.warnings) editors_warning |= w.rfind("editors_by_country: ", 0) == 0;
  EXPECT_TRUE(editors_warning);
  EXPECT_GT(r.requests, 0u);
}

TEST(Snapshot, ManyKeepsOrderAndIsolatesFailures) {
  Harness h;
  h.transport.add(kSiteInfo, 200, kSiteInfoBody);
  const auto out = h.ingestor.snapshot_many({WikiId{"xx"}, WikiId{"yy"}}, april_2021());
  ASSERT_EQ(out.size(), 2u);
  EXPECT_TRUE(out[0].report.has_value());
  EXPECT_EQ(out[1].error, ErrorCode::HardFailure);
}

TEST(Curated, LoadsBundledFileAndRejectsUnknownFields) {
  const auto curated = load_curated(kiro::testing::data_dir() / "curated.json");
  EXPECT_TRUE(curated.contains("ja"));
  kiro::testing::TempDir tmp;
  kiro::testing::write_text(tmp / "c.json", R"({"xx":{"patroling_tools":3,"provenance":"typo"}})");
  EXPECT_EQ(code_of([&] { load_curated(tmp / "c.json"); }), ErrorCode::ParseError);
}

class ReplayGolden : public ::testing::TestWithParam<std::string> {};

TEST_P(ReplayGolden, ReplayedSnapshotIsByteIdentical) {
  const auto code = GetParam();
  const auto data = kiro::testing::data_dir();
  fetch::ReplayTransport transport(kiro::testing::recorded_dir() / code);
  fetch::ManualClock clock(parse_timestamp("2021-05-01T00:00:00Z"));
  IngestSources sources{load_curated(data / "curated.json"), data / "providers", data / "media"};
  Ingestor ingestor(transport, clock, policy(), Endpoints{}, sources);
  auto report = ingestor.snapshot_wiki(WikiId{code}, april_2021());
  report.snapshot.captured_at = parse_timestamp("2021-05-01T00:00:00Z");
  const auto golden = kiro::testing::read_text(kiro::testing::fixtures_dir() /
                                               fixture_file_name(WikiId{code}, april_2021()));
  EXPECT_EQ(json_io::canonical_dump(json_io::to_json(report.snapshot, false)) + "\n", golden);
}

INSTANTIATE_TEST_SUITE_P(Corpus, ReplayGolden, ::testing::Values("ja", "ceb", "arz"));

TEST(ReplayContracts, RetriesAndWarningsMatchTheRecording) {
  const auto data = kiro::testing::data_dir();
  fetch::ReplayTransport transport(kiro::testing::recorded_dir() / "ceb");
  fetch::ManualClock clock(parse_timestamp("2021-05-01T00:00:00Z"));
  IngestSources sources{load_curated(data / "curated.json"), data / "providers", data / "media"};
  Ingestor ingestor(transport, clock, policy(), Endpoints{}, sources);
  const auto r = ingestor.snapshot_wiki(WikiId{"ceb"}, april_2021());
  EXPECT_EQ(r.retries, 1u);  // one 429 on the views series
  EXPECT_NE(std::find(r.snapshot.warnings.begin(), r.snapshot.warnings.end(),
                      "abuse_filters: not available on this wiki"),
            r.snapshot.warnings.end());
  EXPECT_EQ(r.snapshot.group_counts.at("oversight"), 0u);
}

}  // namespace
}  // namespace kiro::ingest
