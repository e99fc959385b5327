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

#pragma once

// Fetchers for the raw per-wiki facts and the orchestration that turns them
// into one WikiSnapshot per wiki and window. Payload parsing is pure; all
// network access goes through a FetchScheduler.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "kiro/error.hpp"
#include "kiro/fetch.hpp"
#include "kiro/json_io.hpp"
#include "kiro/model.hpp"

namespace kiro::ingest {

/// A privacy-bucketed or exact count from the analytics endpoints.
struct BucketedCount {
  std::string raw_label;
  double estimate = 0.0;
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
};

/// "n" passes through; "lo..hi" (1 <= lo <= hi) becomes sqrt(lo*hi).
BucketedCount bucket_estimate(std::string_view raw_label);

/// Operator-maintained facts with no machine-readable upstream.
struct CuratedEntry {
  std::uint64_t patrolling_tools = 0;
  std::uint64_t stewards_with_language = 0;
  std::optional<std::uint64_t> deletion_requests;
  std::optional<std::uint64_t> steward_requests;
  std::optional<std::string> stub_category;  // e.g. "Category:Stubs"
  std::string provenance;
};
using CuratedData = std::map<std::string, CuratedEntry>;  // keyed by wiki slug

CuratedData load_curated(const std::filesystem::path& path);

/// Where the fetchers point. `{code}` and `{family}` are substituted.
struct Endpoints {
  std::string wiki_api = "https://{code}.{family}.org/w/api.php";
  std::string analytics = "https://wikimedia.org/api/rest_v1/metrics";
};

struct IngestSources {
  CuratedData curated;
  std::filesystem::path providers_dir;  // <provider>.json: {slug: {key: value}}
  std::filesystem::path media_dir;      // <window>.json: {slug: {referrer class: visits}}
};

inline const std::set<std::string>& elevated_groups() {
  static const std::set<std::string> groups{"bureaucrat", "checkuser", "oversight", "rollbacker",
                                            "sysop"};
  return groups;
}

inline constexpr std::string_view kActivityLevels[] = {"5..99-edits", "100..-edits"};

// Pure payload parsers; exposed for tests.
SiteStats parse_site_statistics(std::string_view body);
CountryDistribution parse_views_by_country(std::string_view body, Month month);
CountryDistribution parse_editors_by_country(std::string_view body, Month month);
CountryDistribution parse_edits_by_country(std::string_view body, Month month);

struct SnapshotReport {
  WikiSnapshot snapshot;
  std::size_t requests = 0;
  std::size_t retries = 0;
};

class Ingestor {
 public:
  Ingestor(fetch::Transport& transport, fetch::Clock& clock, fetch::FetchPolicy policy,
           Endpoints endpoints = {}, IngestSources sources = {});

  /// UnknownWiki on 404, ParseError when the payload shape changed,
  /// NetworkError when retries run out.
  SiteStats fetch_site_statistics(const WikiId& wiki,
                                  const std::optional<std::string>& stub_category = std::nullopt);
  std::map<std::string, std::uint64_t> fetch_user_group_counts(const WikiId& wiki,
                                                               const std::set<std::string>& groups);
  /// Distinct holders of any elevated group, optionally restricted to users
  /// active in the upstream 30-day window.
  std::uint64_t fetch_elevated_union(const WikiId& wiki, bool active_only);
  GovernanceStats fetch_governance_stats(
      const WikiId& wiki, std::optional<std::uint64_t> total_accounts = std::nullopt);
  CountryDistribution fetch_views_by_country(const WikiId& wiki, Month month);
  CountryDistribution fetch_editors_by_country(const WikiId& wiki, Month month,
                                               std::string_view activity_level);
  CountryDistribution fetch_edits_by_country(const WikiId& wiki, Month month);

  /// Runs every fetcher for one wiki. Only a site-statistics failure is fatal
  /// (HardFailure); anything else becomes an absent section plus a warning.
  SnapshotReport snapshot_wiki(const WikiId& wiki, const MonthWindow& window);

  /// Snapshots several wikis concurrently; results keep input order and each
  /// entry is either a report or the error message.
  struct Outcome {
    WikiId wiki;
    std::optional<SnapshotReport> report;
    std::optional<ErrorCode> error;
    std::string message;
  };
  std::vector<Outcome> snapshot_many(const std::vector<WikiId>& wikis, const MonthWindow& window);

  fetch::FetchTelemetry telemetry() const { return scheduler_.telemetry(); }

 private:
  std::string api_url(const WikiId& wiki, std::string_view query) const;
  std::string analytics_url(const WikiId& wiki, std::string_view series, Month month) const;
  /// Follows MediaWiki "continue" blocks and counts the entries of `list`.
  std::uint64_t count_listing(const WikiId& wiki, const std::string& query, std::string_view list,
                              const std::function<bool(const json_io::Json&)>& keep = {});
  std::optional<std::uint64_t> count_enabled_filters(const WikiId& wiki);
  std::uint64_t count_blocked_accounts(const WikiId& wiki);
  std::mutex& wiki_lock(const WikiId& wiki);

  fetch::FetchScheduler scheduler_;
  fetch::Clock& clock_;
  Endpoints endpoints_;
  IngestSources sources_;

  std::mutex locks_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> wiki_locks_;
};

/// Loads a snapshot fixture (fixture_origin forced true). FileNotFound,
/// SchemaVersionMismatch or ParseError.
WikiSnapshot load_fixture_snapshot(const std::filesystem::path& path);

/// "<code>.<family>.<window>.snapshot.json"
std::string fixture_file_name(const WikiId& wiki, const MonthWindow& window);

}  // namespace kiro::ingest
