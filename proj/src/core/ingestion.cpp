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

#include "kiro/ingestion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <sstream>

#include "kiro/error.hpp"

namespace kiro::ingest {
namespace {

using json_io::Json;

constexpr std::string_view kApiPrefix = "action=query&format=json&formatversion=2&";

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::FileNotFound, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t parse_uint(std::string_view text, std::string_view label) {
  if (text.empty() || text.size() > 19 ||
      !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    fail(ErrorCode::ParseError, "malformed bucket label '" + std::string(label) + "'");
  }
  return std::stoull(std::string(text));
}

// Counts arrive as JSON integers, but some payloads carry integral floats (9e8).
std::uint64_t as_count(const Json& j, std::string_view what) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return j.get<std::uint64_t>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (v >= 0.0 && std::floor(v) == v && v < 1.8e19) return static_cast<std::uint64_t>(v);
  }
  fail(ErrorCode::ParseError, "field '" + std::string(what) + "' is not a non-negative integer");
}

const Json& require(const Json& j, std::string_view key, std::string_view where) {
  if (!j.is_object() || !j.contains(key)) {
    fail(ErrorCode::ParseError, std::string(where) + ": missing field '" + std::string(key) + "'");
  }
  return j.at(std::string(key));
}

std::optional<std::string> api_error_code(const Json& j) {
  if (j.is_object() && j.contains("error") && j["error"].is_object()) {
    const auto& e = j["error"];
    return e.contains("code") && e["code"].is_string() ? e["code"].get<std::string>() : "unknown";
  }
  return std::nullopt;
}

std::string two_digits(int v) { return (v < 10 ? "0" : "") + std::to_string(v); }

// Shared shape of the analytics per-country series.
CountryDistribution parse_country_series(std::string_view body, Month month, CountrySubject subject,
                                         std::string_view list_key, std::string_view value_key) {
  const auto where = std::string(to_string(subject)) + "-by-country " + month.to_string();
  const Json j = json_io::parse(body, where);
  const Json& items = require(j, "items", where);
  if (!items.is_array()) fail(ErrorCode::ParseError, where + ": items is not an array");
  if (items.empty()) fail(ErrorCode::NoData, where + ": no items");

  CountryDistribution d;
  d.subject = subject;
  d.window = MonthWindow::single(month);
  for (const auto& item : items) {
    const Json& rows = require(item, list_key, where);
    if (!rows.is_array()) fail(ErrorCode::ParseError, where + ": " + std::string(list_key) + " is not an array");
    for (const auto& row : rows) {
      const Json& country = require(row, "country", where);
      if (!country.is_string()) fail(ErrorCode::ParseError, where + ": country is not a string");
      const auto code = country.get<std::string>();
      if (code == "--") continue;  // upstream's unknown-country bucket
      if (!is_country_code(code)) fail(ErrorCode::ParseError, where + ": bad country code '" + code + "'");

      const Json& raw = require(row, value_key, where);
      double magnitude = 0.0;
      if (raw.is_string()) {
        magnitude = bucket_estimate(raw.get<std::string>()).estimate;
      } else {
        magnitude = static_cast<double>(as_count(raw, value_key));
      }
      if (!d.entries.emplace(code, magnitude).second) {
        fail(ErrorCode::ParseError, where + ": duplicate country code '" + code + "'");
      }
    }
  }
  if (d.entries.empty() || d.total() <= 0.0) fail(ErrorCode::NoData, where + ": empty country list");
  return d;
}

std::string substitute(std::string pattern, const WikiId& wiki) {
  auto replace = [&](std::string_view token, const std::string& value) {
    for (auto pos = pattern.find(token); pos != std::string::npos; pos = pattern.find(token, pos)) {
      pattern.replace(pos, token.size(), value);
      pos += value.size();
    }
  };
  replace("{code}", wiki.code);
  replace("{family}", wiki.family);
  return pattern;
}

void merge_into(std::map<std::string, double>& acc, const CountryDistribution& d) {
  for (const auto& [code, m] : d.entries) acc[code] += m;
}

}  // namespace

// ---------------------------------------------------------------------------

BucketedCount bucket_estimate(std::string_view raw_label) {
  BucketedCount out;
  out.raw_label = std::string(raw_label);
  const auto sep = raw_label.find("..");
  if (sep == std::string_view::npos) {
    out.lo = out.hi = parse_uint(raw_label, raw_label);
    out.estimate = static_cast<double>(out.lo);
    return out;
  }
  out.lo = parse_uint(raw_label.substr(0, sep), raw_label);
  out.hi = parse_uint(raw_label.substr(sep + 2), raw_label);
  if (out.lo < 1 || out.lo > out.hi) {
    fail(ErrorCode::ParseError, "bucket label '" + out.raw_label + "' needs 1 <= lo <= hi");
  }
  // Geometric midpoint; clamp so rounding never leaves [lo, hi].
  out.estimate = std::clamp(std::sqrt(static_cast<double>(out.lo)) * std::sqrt(static_cast<double>(out.hi)),
                            static_cast<double>(out.lo), static_cast<double>(out.hi));
  return out;
}

CuratedData load_curated(const std::filesystem::path& path) {
  const Json j = json_io::parse(read_file(path), path.string());
  if (!j.is_object()) fail(ErrorCode::ParseError, path.string() + ": expected an object");
  static const std::set<std::string> known{"patrolling_tools", "stewards_with_language",
                                           "deletion_requests", "steward_requests",
                                           "stub_category",     "provenance"};
  CuratedData out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto where = path.string() + ": " + it.key();
    const Json& e = it.value();
    if (!e.is_object()) fail(ErrorCode::ParseError, where + ": expected an object");
    for (auto f = e.begin(); f != e.end(); ++f) {
      if (!known.contains(f.key())) fail(ErrorCode::ParseError, where + ": unknown field '" + f.key() + "'");
    }
    CuratedEntry entry;
    entry.patrolling_tools = as_count(require(e, "patrolling_tools", where), "patrolling_tools");
    entry.stewards_with_language =
        as_count(require(e, "stewards_with_language", where), "stewards_with_language");
    const Json& provenance = require(e, "provenance", where);
    if (!provenance.is_string()) fail(ErrorCode::ParseError, where + ": provenance must be a string");
    entry.provenance = provenance.get<std::string>();
    if (e.contains("deletion_requests")) entry.deletion_requests = as_count(e["deletion_requests"], "deletion_requests");
    if (e.contains("steward_requests")) entry.steward_requests = as_count(e["steward_requests"], "steward_requests");
    if (e.contains("stub_category")) {
      if (!e["stub_category"].is_string()) fail(ErrorCode::ParseError, where + ": stub_category must be a string");
      entry.stub_category = e["stub_category"].get<std::string>();
    }
    out.emplace(it.key(), std::move(entry));
  }
  return out;
}

SiteStats parse_site_statistics(std::string_view body) {
  constexpr std::string_view where = "siteinfo statistics";
  const Json j = json_io::parse(body, where);
  if (auto code = api_error_code(j)) fail(ErrorCode::ParseError, "siteinfo: API error '" + *code + "'");
  const Json& stats = require(require(j, "query", where), "statistics", where);
  SiteStats s;
  s.articles = as_count(require(stats, "articles", where), "articles");
  s.total_pages = as_count(require(stats, "pages", where), "pages");
  s.edits = as_count(require(stats, "edits", where), "edits");
  s.editors = as_count(require(stats, "users", where), "users");
  s.active_editors = as_count(require(stats, "activeusers", where), "activeusers");
  try {
    s.validate();
  } catch (const Error& e) {
    fail(ErrorCode::ParseError, std::string("siteinfo: ") + e.what());
  }
  return s;
}

CountryDistribution parse_views_by_country(std::string_view body, Month month) {
  return parse_country_series(body, month, CountrySubject::Views, "countries", "views");
}

CountryDistribution parse_editors_by_country(std::string_view body, Month month) {
  return parse_country_series(body, month, CountrySubject::ActiveEditors, "results", "editors");
}

CountryDistribution parse_edits_by_country(std::string_view body, Month month) {
  return parse_country_series(body, month, CountrySubject::Edits, "results", "edits");
}

// ---------------------------------------------------------------------------

Ingestor::Ingestor(fetch::Transport& transport, fetch::Clock& clock, fetch::FetchPolicy policy,
                   Endpoints endpoints, IngestSources sources)
    : scheduler_(transport, clock, std::move(policy)),
      clock_(clock),
      endpoints_(std::move(endpoints)),
      sources_(std::move(sources)) {}

std::string Ingestor::api_url(const WikiId& wiki, std::string_view query) const {
  return substitute(endpoints_.wiki_api, wiki) + "?" + std::string(kApiPrefix) + std::string(query);
}

std::string Ingestor::analytics_url(const WikiId& wiki, std::string_view series, Month month) const {
  // series is e.g. "pageviews/top-by-country/{project}/all-access"
  std::string path(series);
  const auto token = path.find("{project}");
  if (token != std::string::npos) path.replace(token, 9, wiki.code + "." + wiki.family);
  return endpoints_.analytics + "/" + path + "/" + std::to_string(month.year) + "/" +
         two_digits(month.month);
}

std::mutex& Ingestor::wiki_lock(const WikiId& wiki) {
  std::lock_guard lock(locks_mutex_);
  auto& slot = wiki_locks_[wiki.slug()];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

std::uint64_t Ingestor::count_listing(const WikiId& wiki, const std::string& query,
                                      std::string_view list,
                                      const std::function<bool(const Json&)>& keep) {
  std::uint64_t count = 0;
  std::string continuation;
  const auto where = std::string(list) + " listing for " + wiki.slug();
  for (;;) {
    const auto result = scheduler_.fetch(api_url(wiki, query + continuation));
    if (result.response.status == 404) fail(ErrorCode::UnknownWiki, "unknown wiki '" + wiki.slug() + "'");
    if (result.response.status != 200) {
      fail(ErrorCode::NetworkError, where + ": HTTP " + std::to_string(result.response.status));
    }
    const Json j = json_io::parse(result.response.body, where);
    if (auto code = api_error_code(j)) {
      // badvalue: the wiki lacks the group or the list module (extension).
      fail(*code == "badvalue" ? ErrorCode::NoData : ErrorCode::ParseError,
           where + ": API error '" + *code + "'");
    }
    const Json& rows = require(require(j, "query", where), list, where);
    if (!rows.is_array()) fail(ErrorCode::ParseError, where + ": not an array");
    for (const auto& row : rows) {
      if (!keep || keep(row)) ++count;
    }
    if (!j.contains("continue")) break;
    const Json& cont = j["continue"];
    if (!cont.is_object() || cont.empty()) fail(ErrorCode::ParseError, where + ": malformed continue block");
    continuation.clear();
    for (auto it = cont.begin(); it != cont.end(); ++it) {
      const auto value = it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
      continuation += "&" + it.key() + "=" + fetch::url_encode(value);
    }
  }
  return count;
}

SiteStats Ingestor::fetch_site_statistics(const WikiId& wiki,
                                          const std::optional<std::string>& stub_category) {
  const auto result = scheduler_.fetch(api_url(wiki, "meta=siteinfo&siprop=statistics"));
  if (result.response.status == 404) fail(ErrorCode::UnknownWiki, "unknown wiki '" + wiki.slug() + "'");
  if (result.response.status != 200) {
    fail(ErrorCode::NetworkError,
         "siteinfo for " + wiki.slug() + ": HTTP " + std::to_string(result.response.status));
  }
  SiteStats stats = parse_site_statistics(result.response.body);

  if (stub_category) {
    const auto where = "categoryinfo for " + wiki.slug();
    const auto cat = scheduler_.fetch(
        api_url(wiki, "prop=categoryinfo&titles=" + fetch::url_encode(*stub_category)));
    if (cat.response.status == 200) {
      const Json j = json_io::parse(cat.response.body, where);
      const Json& pages = require(require(j, "query", where), "pages", where);
      if (pages.is_array() && !pages.empty() && pages[0].contains("categoryinfo")) {
        stats.stub_articles =
            std::min(stats.articles, as_count(require(pages[0]["categoryinfo"], "pages", where), "pages"));
      }
    }
  }
  return stats;
}

std::map<std::string, std::uint64_t> Ingestor::fetch_user_group_counts(
    const WikiId& wiki, const std::set<std::string>& groups) {
  if (groups.empty()) fail(ErrorCode::InvalidArgument, "fetch_user_group_counts: empty group set");
  std::map<std::string, std::uint64_t> out;
  for (const auto& group : groups) {
    try {
      out[group] = count_listing(wiki, "list=allusers&augroup=" + fetch::url_encode(group) + "&aulimit=500",
                                 "allusers");
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoData) throw;
      out[group] = 0;  // the wiki does not define this group
    }
  }
  return out;
}

std::uint64_t Ingestor::fetch_elevated_union(const WikiId& wiki, bool active_only) {
  std::string groups;
  for (const auto& g : elevated_groups()) groups += (groups.empty() ? "" : "|") + g;
  std::string query = "list=allusers&augroup=" + fetch::url_encode(groups) + "&aulimit=500";
  if (active_only) query += "&auactiveusers=1";
  return count_listing(wiki, query, "allusers");
}

std::optional<std::uint64_t> Ingestor::count_enabled_filters(const WikiId& wiki) {
  try {
    return count_listing(wiki, "list=abusefilters&abfprop=id%7Cstatus&abflimit=500", "abusefilters",
                         [](const Json& row) {
                           return row.value("enabled", false) && !row.value("deleted", false);
                         });
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoData) throw;
    return std::nullopt;  // no AbuseFilter extension: absent, not zero
  }
}

std::uint64_t Ingestor::count_blocked_accounts(const WikiId& wiki) {
  return count_listing(wiki, "list=blocks&bkprop=id%7Cuser&bkshow=account&bklimit=500", "blocks");
}

GovernanceStats Ingestor::fetch_governance_stats(const WikiId& wiki,
                                                 std::optional<std::uint64_t> total_accounts) {
  GovernanceStats g;
  g.abusefilter_rules = count_enabled_filters(wiki);
  g.blocked_accounts = count_blocked_accounts(wiki);
  g.total_accounts = total_accounts ? total_accounts : fetch_site_statistics(wiki).editors;
  return g;
}

CountryDistribution Ingestor::fetch_views_by_country(const WikiId& wiki, Month month) {
  const auto r = scheduler_.fetch(analytics_url(wiki, "pageviews/top-by-country/{project}/all-access", month));
  if (r.response.status == 404) {
    fail(ErrorCode::NoData, "views-by-country " + wiki.slug() + " " + month.to_string() + ": no data");
  }
  if (r.response.status != 200) {
    fail(ErrorCode::NetworkError, "views-by-country: HTTP " + std::to_string(r.response.status));
  }
  return parse_views_by_country(r.response.body, month);
}

CountryDistribution Ingestor::fetch_editors_by_country(const WikiId& wiki, Month month,
                                                       std::string_view activity_level) {
  const auto r = scheduler_.fetch(analytics_url(
      wiki, "editors/by-country/{project}/" + std::string(activity_level), month));
  if (r.response.status == 404) {
    fail(ErrorCode::NoData, "editors-by-country " + wiki.slug() + " " + month.to_string() + " (" +
                                std::string(activity_level) + "): no data");
  }
  if (r.response.status != 200) {
    fail(ErrorCode::NetworkError, "editors-by-country: HTTP " + std::to_string(r.response.status));
  }
  return parse_editors_by_country(r.response.body, month);
}

CountryDistribution Ingestor::fetch_edits_by_country(const WikiId& wiki, Month month) {
  const auto r = scheduler_.fetch(analytics_url(wiki, "edits/by-country/{project}/all-editor-types", month));
  if (r.response.status == 404) {
    fail(ErrorCode::NoData, "edits-by-country " + wiki.slug() + " " + month.to_string() + ": no data");
  }
  if (r.response.status != 200) {
    fail(ErrorCode::NetworkError, "edits-by-country: HTTP " + std::to_string(r.response.status));
  }
  return parse_edits_by_country(r.response.body, month);
}

// ---------------------------------------------------------------------------

SnapshotReport Ingestor::snapshot_wiki(const WikiId& wiki, const MonthWindow& window) {
  std::lock_guard serialize(wiki_lock(wiki));
  const auto before = scheduler_.telemetry();

  const CuratedEntry* curated = nullptr;
  if (auto it = sources_.curated.find(wiki.slug()); it != sources_.curated.end()) curated = &it->second;
  const auto stub_category = curated ? curated->stub_category : std::nullopt;

  constexpr auto async = std::launch::async;
  auto site_f = std::async(async, [&] { return fetch_site_statistics(wiki, stub_category); });
  auto groups_f = std::async(async, [&] {
    auto counts = fetch_user_group_counts(wiki, elevated_groups());
    counts[std::string(kElevatedAny)] = fetch_elevated_union(wiki, false);
    counts[std::string(kElevatedActive)] = fetch_elevated_union(wiki, true);
    return counts;
  });
  auto filters_f = std::async(async, [&] { return count_enabled_filters(wiki); });
  auto blocks_f = std::async(async, [&] { return count_blocked_accounts(wiki); });

  struct MonthFutures {
    Month month;
    std::future<CountryDistribution> views;
    std::future<CountryDistribution> edits;
    std::vector<std::future<CountryDistribution>> editors;
  };
  std::vector<MonthFutures> per_month;
  for (Month m : window.months()) {
    MonthFutures mf{m, std::async(async, [this, &wiki, m] { return fetch_views_by_country(wiki, m); }),
                    std::async(async, [this, &wiki, m] { return fetch_edits_by_country(wiki, m); }),
                    {}};
    for (auto level : kActivityLevels) {
      mf.editors.push_back(
          std::async(async, [this, &wiki, m, level] { return fetch_editors_by_country(wiki, m, level); }));
    }
    per_month.push_back(std::move(mf));
  }

  WikiSnapshot s;
  s.wiki = wiki;
  s.window = window;
  std::vector<std::string>& warnings = s.warnings;

  std::optional<Error> site_error;
  try {
    s.site_stats = site_f.get();
  } catch (const Error& e) {
    site_error = e;
  }
  try {
    s.group_counts = groups_f.get();
  } catch (const Error& e) {
    warnings.push_back(std::string("user_groups: ") + e.what());
  }
  try {
    s.governance_stats.abusefilter_rules = filters_f.get();
    if (!s.governance_stats.abusefilter_rules) warnings.push_back("abuse_filters: not available on this wiki");
  } catch (const Error& e) {
    warnings.push_back(std::string("abuse_filters: ") + e.what());
  }
  try {
    s.governance_stats.blocked_accounts = blocks_f.get();
  } catch (const Error& e) {
    warnings.push_back(std::string("blocks: ") + e.what());
  }

  for (auto& mf : per_month) {
    auto take = [&](std::future<CountryDistribution>& f, std::string_view section)
        -> std::optional<CountryDistribution> {
      try {
        return f.get();
      } catch (const Error& e) {
        warnings.push_back(std::string(section) + ": " + e.what());
        return std::nullopt;
      }
    };
    if (auto d = take(mf.edits, "edits_by_country")) s.distributions.push_back(std::move(*d));
    if (auto d = take(mf.views, "views_by_country")) s.distributions.push_back(std::move(*d));
    std::optional<CountryDistribution> editors;
    for (auto& f : mf.editors) {
      if (auto d = take(f, "editors_by_country")) {
        if (!editors) {
          editors = std::move(*d);
        } else {
          merge_into(editors->entries, *d);
        }
      }
    }
    if (editors) s.distributions.push_back(std::move(*editors));
  }
  std::stable_sort(s.distributions.begin(), s.distributions.end(),
                   [](const CountryDistribution& a, const CountryDistribution& b) {
                     return std::pair(a.window.start, a.subject) < std::pair(b.window.start, b.subject);
                   });

  if (site_error) {
    fail(ErrorCode::HardFailure,
         "site statistics unavailable for " + wiki.slug() + ": " + site_error->what());
  }
  s.governance_stats.total_accounts = s.site_stats.editors;

  if (curated) {
    s.external_scores[std::string(kCuratedProvider)] = {
        {"patrolling_tools", static_cast<double>(curated->patrolling_tools)},
        {"stewards_with_language", static_cast<double>(curated->stewards_with_language)}};
    s.governance_stats.deletion_requests = curated->deletion_requests;
    s.governance_stats.steward_requests = curated->steward_requests;
  } else {
    warnings.push_back("curated: no entry for " + wiki.slug());
  }

  auto read_table = [&](const std::filesystem::path& file, const std::string& provider) {
    try {
      const Json j = json_io::parse(read_file(file), file.string());
      if (!j.contains(wiki.slug())) return;
      ScoreTable table;
      for (auto it = j[wiki.slug()].begin(); it != j[wiki.slug()].end(); ++it) {
        if (!it.value().is_number()) fail(ErrorCode::ParseError, file.string() + ": non-numeric score");
        table.emplace(it.key(), it.value().get<double>());
      }
      s.external_scores[provider] = std::move(table);
    } catch (const Error& e) {
      warnings.push_back(provider + ": " + e.what());
    }
  };
  if (!sources_.providers_dir.empty() && std::filesystem::is_directory(sources_.providers_dir)) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(sources_.providers_dir)) {
      if (e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) read_table(f, f.stem().string());
  }
  if (!sources_.media_dir.empty()) {
    const auto file = sources_.media_dir / (window.label() + ".json");
    if (std::filesystem::exists(file)) {
      read_table(file, std::string(kMediaReferralsProvider));
    } else {
      warnings.push_back("media_referrals: no referral file for " + window.label());
    }
  }

  s.captured_at = clock_.wall_now();
  s.fixture_origin = false;
  s.validate();

  const auto after = scheduler_.telemetry();
  return SnapshotReport{std::move(s), after.requests - before.requests, after.retries - before.retries};
}

std::vector<Ingestor::Outcome> Ingestor::snapshot_many(const std::vector<WikiId>& wikis,
                                                       const MonthWindow& window) {
  std::vector<std::future<SnapshotReport>> futures;
  for (const auto& w : wikis) {
    futures.push_back(std::async(std::launch::async, [this, w, window] { return snapshot_wiki(w, window); }));
  }
  std::vector<Outcome> out;
  for (std::size_t i = 0; i < wikis.size(); ++i) {
    Outcome o{wikis[i], std::nullopt, std::nullopt, {}};
    try {
      o.report = futures[i].get();
    } catch (const Error& e) {
      o.error = e.code();
      o.message = e.what();
    }
    out.push_back(std::move(o));
  }
  return out;
}

// ---------------------------------------------------------------------------

WikiSnapshot load_fixture_snapshot(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorCode::FileNotFound, "fixture not found: " + path.string());
  const Json j = json_io::parse(read_file(path), path.string());
  WikiSnapshot s = json_io::snapshot_from_json(j);
  s.fixture_origin = true;
  return s;
}

std::string fixture_file_name(const WikiId& wiki, const MonthWindow& window) {
  return wiki.code + "." + wiki.family + "." + window.label() + ".snapshot.json";
}

}  // namespace kiro::ingest
