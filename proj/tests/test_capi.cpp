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
#include <httplib.h>
#include <json.hpp>

#include <cstring>
#include <memory>

#include "interface_support.hpp"
#include "kiro/kiro.h"

namespace {

using nlohmann::json;
using kiro::interface_testing::data_dir;
using kiro::interface_testing::read_text;
using kiro::interface_testing::TempDir;

std::string take(char* s) {
  std::string out = s ? s : "";
  kiro_string_free(s);
  return out;
}

struct Handle {
  kiro_observatory* obs = nullptr;
  ~Handle() { kiro_close(obs); }
};

std::string store_override(const TempDir& dir) { return json{{"store_root", (dir / "store").string()}}.dump(); }

kiro_status open_bundled(const TempDir& dir, Handle& h) {
  return kiro_open((data_dir() / "observatory.json").c_str(), store_override(dir).c_str(), &h.obs);
}

TEST(CApi, VersionAndStatusStrings) {
  EXPECT_GT(std::strlen(kiro_version()), 0u);
  EXPECT_STREQ(kiro_status_string(KIRO_OK), "ok");
  EXPECT_STREQ(kiro_status_string(KIRO_E_UNKNOWN_WIKI), "unknown_wiki");
  EXPECT_STREQ(kiro_status_string(KIRO_E_CONFIG), "config_error");
  EXPECT_STREQ(kiro_status_string(KIRO_E_INTERNAL), "internal");
}

TEST(CApi, NullArgumentsAreRejected) {
  EXPECT_EQ(kiro_open(nullptr, nullptr, nullptr), KIRO_E_INVALID_ARGUMENT);
  EXPECT_GT(std::strlen(kiro_last_error()), 0u);
  EXPECT_EQ(kiro_compute(nullptr, "2021-04", nullptr), KIRO_E_INVALID_ARGUMENT);
  kiro_close(nullptr);
  kiro_string_free(nullptr);
}

TEST(CApi, ConfigErrorsSurfaceAsStatus) {
  TempDir dir;
  Handle h;
  EXPECT_EQ(kiro_open(nullptr, R"({"min_article":5})", &h.obs), KIRO_E_CONFIG);
  EXPECT_EQ(h.obs, nullptr);
  EXPECT_NE(std::string(kiro_last_error()).find("min_article"), std::string::npos);
  EXPECT_EQ(kiro_open(nullptr, "{not json", &h.obs), KIRO_E_CONFIG);
}

TEST(CApi, ConfigTaxonomyRegistryDocuments) {
  TempDir dir;
  Handle h;
  ASSERT_EQ(open_bundled(dir, h), KIRO_OK);
  char* s = nullptr;
  ASSERT_EQ(kiro_config_json(h.obs, &s), KIRO_OK);
  EXPECT_EQ(json::parse(take(s)).at("min_articles"), 500000);
  ASSERT_EQ(kiro_taxonomy_json(&s), KIRO_OK);
  EXPECT_EQ(json::parse(take(s)).at("categories").size(), 8u);
  ASSERT_EQ(kiro_registry_json(h.obs, &s), KIRO_OK);
  EXPECT_GT(json::parse(take(s)).at("indicators").size(), 20u);
}

TEST(CApi, IngestComputeScatterExport) {
  TempDir dir;
  Handle h;
  ASSERT_EQ(open_bundled(dir, h), KIRO_OK);
  const auto fixtures = data_dir() / "fixtures" / "snapshots";

  kiro_ingest_report* report = nullptr;
  ASSERT_EQ(kiro_ingest(h.obs, "ja,xx", "2021-04", KIRO_INGEST_FIXTURES, fixtures.c_str(), &report), KIRO_OK);
  ASSERT_EQ(kiro_ingest_report_count(report), 2u);
  EXPECT_EQ(kiro_ingest_report_ok(report), 0);
  const char* wiki = nullptr;
  const char* message = nullptr;
  kiro_status status = KIRO_OK;
  int created = 0;
  ASSERT_EQ(kiro_ingest_report_entry(report, 1, &wiki, &status, &message, &created), KIRO_OK);
  EXPECT_STREQ(wiki, "xx");
  EXPECT_EQ(status, KIRO_E_UNKNOWN_WIKI);
  EXPECT_EQ(created, 0);
  EXPECT_EQ(kiro_ingest_report_entry(report, 2, &wiki, &status, &message, &created), KIRO_E_INVALID_ARGUMENT);
  char* s = nullptr;
  ASSERT_EQ(kiro_ingest_report_json(report, &s), KIRO_OK);
  EXPECT_EQ(json::parse(take(s)).at("stored"), 1);
  kiro_ingest_report_free(report);

  ASSERT_EQ(kiro_ingest(h.obs, nullptr, "2021-04", KIRO_INGEST_FIXTURES, fixtures.c_str(), &report), KIRO_OK);
  EXPECT_EQ(kiro_ingest_report_count(report), 27u);
  EXPECT_EQ(kiro_ingest_report_ok(report), 1);
  kiro_ingest_report_free(report);

  ASSERT_EQ(kiro_compute(h.obs, "2021-04", &s), KIRO_OK);
  const auto summary = json::parse(take(s));
  EXPECT_EQ(summary.at("snapshots"), 27);
  EXPECT_EQ(summary.at("scatter_stored"), true);

  ASSERT_EQ(kiro_scatter(h.obs, "2021-04", 0, (dir / "fig").c_str(), &s), KIRO_OK);
  EXPECT_EQ(json::parse(take(s)).at("n_points"), 25);
  const auto goldens = data_dir() / "goldens" / "e2e" / "2021-04";
  EXPECT_EQ(read_text(dir / "fig/fit.json"), read_text(goldens / "fit.json"));
  EXPECT_EQ(kiro_scatter(h.obs, "2021-04", 50000000, nullptr, nullptr), KIRO_E_INSUFFICIENT_DATA);

  size_t files = 0;
  ASSERT_EQ(kiro_export(h.obs, "2021-04", (dir / "export").c_str(), &files), KIRO_OK);
  EXPECT_EQ(files, 29u);
  EXPECT_EQ(read_text(dir / "export/matrix.json"), read_text(goldens / "matrix.json"));
}

TEST(CApi, BadWindowAndEmptyWindow) {
  TempDir dir;
  Handle h;
  ASSERT_EQ(open_bundled(dir, h), KIRO_OK);
  EXPECT_EQ(kiro_compute(h.obs, "April", nullptr), KIRO_E_PARSE);
  EXPECT_EQ(kiro_compute(h.obs, "2021-04", nullptr), KIRO_E_NO_DATA);
  kiro_ingest_report* report = nullptr;
  EXPECT_EQ(kiro_ingest(h.obs, "ja", "2021-04", KIRO_INGEST_REPLAY, "/nonexistent", &report), KIRO_E_FILE_NOT_FOUND);
  EXPECT_EQ(report, nullptr);
}

TEST(CApi, ServerAnswersHealthAndStops) {
  TempDir dir;
  Handle h;
  ASSERT_EQ(open_bundled(dir, h), KIRO_OK);
  kiro_server* server = nullptr;
  ASSERT_EQ(kiro_server_start(h.obs, "127.0.0.1", 0, &server), KIRO_OK);
  const int port = kiro_server_port(server);
  ASSERT_GT(port, 0);
  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/api/v1/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);

  kiro_server* clash = nullptr;
  EXPECT_EQ(kiro_server_start(h.obs, "127.0.0.1", port, &clash), KIRO_E_BIND);
  EXPECT_EQ(clash, nullptr);

  kiro_server_stop(server);
  kiro_server_wait(server);
  kiro_server_free(server);
}

}  // namespace
