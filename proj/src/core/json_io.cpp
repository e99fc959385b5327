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

#include "kiro/json_io.hpp"

#include <charconv>
#include <cmath>

#include "kiro/error.hpp"

namespace kiro::json_io {
namespace {

void write(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::null: out += "null"; break;
    case Json::value_t::boolean: out += j.get<bool>() ? "true" : "false"; break;
    case Json::value_t::number_integer: out += std::to_string(j.get<std::int64_t>()); break;
    case Json::value_t::number_unsigned: out += std::to_string(j.get<std::uint64_t>()); break;
    case Json::value_t::number_float: out += format_real(j.get<double>()); break;
    case Json::value_t::string: out += j.dump(); break;
    case Json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += ',';
        first = false;
        write(e, out);
      }
      out += ']';
      break;
    }
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map order: sorted keys
        if (!first) out += ',';
        first = false;
        out += Json(it.key()).dump();
        out += ':';
        write(it.value(), out);
      }
      out += '}';
      break;
    }
    case Json::value_t::binary:
    case Json::value_t::discarded:
      fail(ErrorCode::InvalidArgument, "cannot serialize binary/discarded JSON");
  }
}

const Json& field(const Json& j, std::string_view key, std::string_view where) {
  if (!j.is_object()) fail(ErrorCode::ParseError, std::string(where) + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) {
    fail(ErrorCode::ParseError, std::string(where) + ": missing field '" + std::string(key) + "'");
  }
  return *it;
}

const Json* optional_field(const Json& j, std::string_view key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return nullptr;
  return &*it;
}

std::uint64_t as_count(const Json& j, std::string_view what) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return j.get<std::uint64_t>();
  fail(ErrorCode::ParseError, std::string(what) + ": expected a non-negative integer");
}

double as_real(const Json& j, std::string_view what) {
  if (!j.is_number()) fail(ErrorCode::ParseError, std::string(what) + ": expected a number");
  return j.get<double>();
}

std::string as_string(const Json& j, std::string_view what) {
  if (!j.is_string()) fail(ErrorCode::ParseError, std::string(what) + ": expected a string");
  return j.get<std::string>();
}

std::uint64_t count_field(const Json& j, std::string_view key, std::string_view where) {
  return as_count(field(j, key, where), std::string(where) + "." + std::string(key));
}

std::optional<std::uint64_t> optional_count(const Json& j, std::string_view key,
                                            std::string_view where) {
  if (const Json* f = optional_field(j, key)) {
    return as_count(*f, std::string(where) + "." + std::string(key));
  }
  return std::nullopt;
}

void put_optional(Json& j, std::string_view key, const std::optional<std::uint64_t>& v) {
  if (v) j[std::string(key)] = *v;
}

Month month_of(const Json& j, std::string_view what) {
  try {
    return Month::parse(as_string(j, what));
  } catch (const Error& e) {
    fail(ErrorCode::ParseError, std::string(what) + ": " + e.what());
  }
}

std::string_view base_name(metrics::LogBase b) { return b == metrics::LogBase::Two ? "2" : "e"; }

metrics::LogBase base_from(const Json& j) {
  const auto s = as_string(j, "log_base");
  if (s == "e") return metrics::LogBase::Natural;
  if (s == "2") return metrics::LogBase::Two;
  fail(ErrorCode::ParseError, "log_base must be \"e\" or \"2\"");
}

}  // namespace

std::string format_real(double v) {
  if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "non-finite real in canonical JSON");
  if (v == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  if (ec != std::errc{}) fail(ErrorCode::InvalidArgument, "real formatting failed");
  return std::string(buf, ptr);
}

std::string canonical_dump(const Json& value) {
  std::string out;
  write(value, out);
  return out;
}

Json parse(std::string_view text, std::string_view context) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::ParseError, std::string(context) + ": " + e.what());
  }
}

Json to_json(const MonthWindow& w) {
  return Json{{"start", w.start.to_string()}, {"end", w.end.to_string()}};
}

MonthWindow window_from_json(const Json& j) {
  MonthWindow w{month_of(field(j, "start", "window"), "window.start"),
                month_of(field(j, "end", "window"), "window.end")};
  if (!(w.start < w.end)) fail(ErrorCode::ParseError, "window: end must be after start");
  return w;
}

Json to_json(const CountryDistribution& d) {
  Json entries = Json::object();
  for (const auto& [code, m] : d.entries) entries[code] = m;
  return Json{{"subject", std::string(to_string(d.subject))},
              {"window", to_json(d.window)},
              {"entries", std::move(entries)}};
}

CountryDistribution distribution_from_json(const Json& j) {
  CountryDistribution d;
  const auto subject = as_string(field(j, "subject", "distribution"), "distribution.subject");
  auto parsed = parse_subject(subject);
  if (!parsed) fail(ErrorCode::ParseError, "distribution: unknown subject '" + subject + "'");
  d.subject = *parsed;
  d.window = window_from_json(field(j, "window", "distribution"));
  const Json& entries = field(j, "entries", "distribution");
  if (!entries.is_object()) fail(ErrorCode::ParseError, "distribution.entries: expected an object");
  for (auto it = entries.begin(); it != entries.end(); ++it) {
    if (!is_country_code(it.key())) {
      fail(ErrorCode::ParseError, "distribution: bad country code '" + it.key() + "'");
    }
    const double m = as_real(it.value(), "distribution.entries." + it.key());
    if (m < 0.0) fail(ErrorCode::ParseError, "distribution: negative magnitude for " + it.key());
    d.entries.emplace(it.key(), m);
  }
  return d;
}

Json to_json(const WikiSnapshot& s, bool include_origin) {
  Json site{{"articles", s.site_stats.articles},
            {"total_pages", s.site_stats.total_pages},
            {"edits", s.site_stats.edits},
            {"editors", s.site_stats.editors},
            {"active_editors", s.site_stats.active_editors}};
  put_optional(site, "stub_articles", s.site_stats.stub_articles);

  Json governance = Json::object();
  put_optional(governance, "abusefilter_rules", s.governance_stats.abusefilter_rules);
  put_optional(governance, "blocked_accounts", s.governance_stats.blocked_accounts);
  put_optional(governance, "total_accounts", s.governance_stats.total_accounts);
  put_optional(governance, "deletion_requests", s.governance_stats.deletion_requests);
  put_optional(governance, "steward_requests", s.governance_stats.steward_requests);

  Json groups = Json::object();
  for (const auto& [g, n] : s.group_counts) groups[g] = n;

  Json distributions = Json::array();
  for (const auto& d : s.distributions) distributions.push_back(to_json(d));

  Json scores = Json::object();
  for (const auto& [provider, table] : s.external_scores) {
    Json t = Json::object();
    for (const auto& [k, v] : table) t[k] = v;
    scores[provider] = std::move(t);
  }

  Json out{{"schema_version", kSnapshotSchemaVersion},
           {"wiki", s.wiki.code},
           {"family", s.wiki.family},
           {"window", to_json(s.window)},
           {"captured_at", format_timestamp(s.captured_at)},
           {"site_stats", std::move(site)},
           {"group_counts", std::move(groups)},
           {"governance_stats", std::move(governance)},
           {"distributions", std::move(distributions)},
           {"external_scores", std::move(scores)},
           {"warnings", s.warnings}};
  if (include_origin) out["fixture_origin"] = s.fixture_origin;
  return out;
}

WikiSnapshot snapshot_from_json(const Json& j) {
  constexpr std::string_view where = "snapshot";
  if (!j.is_object()) fail(ErrorCode::ParseError, "snapshot: expected an object");
  const Json& version = field(j, "schema_version", where);
  if (!version.is_number_integer() || version.get<std::int64_t>() != kSnapshotSchemaVersion) {
    fail(ErrorCode::SchemaVersionMismatch,
         "snapshot schema_version " + version.dump() + " (supported: 1)");
  }
  static const std::set<std::string> known{
      "schema_version",   "wiki",          "family",          "window",
      "captured_at",      "site_stats",    "group_counts",    "governance_stats",
      "distributions",    "external_scores", "warnings",      "fixture_origin"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.contains(it.key())) fail(ErrorCode::ParseError, "snapshot: unknown field '" + it.key() + "'");
  }

  WikiSnapshot s;
  s.wiki.code = as_string(field(j, "wiki", where), "snapshot.wiki");
  s.wiki.family = as_string(field(j, "family", where), "snapshot.family");
  s.window = window_from_json(field(j, "window", where));
  try {
    s.captured_at = parse_timestamp(as_string(field(j, "captured_at", where), "captured_at"));
  } catch (const Error& e) {
    fail(ErrorCode::ParseError, std::string("snapshot.captured_at: ") + e.what());
  }

  const Json& site = field(j, "site_stats", where);
  s.site_stats.articles = count_field(site, "articles", "site_stats");
  s.site_stats.total_pages = count_field(site, "total_pages", "site_stats");
  s.site_stats.edits = count_field(site, "edits", "site_stats");
  s.site_stats.editors = count_field(site, "editors", "site_stats");
  s.site_stats.active_editors = count_field(site, "active_editors", "site_stats");
  s.site_stats.stub_articles = optional_count(site, "stub_articles", "site_stats");

  const Json& groups = field(j, "group_counts", where);
  if (!groups.is_object()) fail(ErrorCode::ParseError, "group_counts: expected an object");
  for (auto it = groups.begin(); it != groups.end(); ++it) {
    s.group_counts.emplace(it.key(), as_count(it.value(), "group_counts." + it.key()));
  }

  const Json& gov = field(j, "governance_stats", where);
  if (!gov.is_object()) fail(ErrorCode::ParseError, "governance_stats: expected an object");
  s.governance_stats.abusefilter_rules = optional_count(gov, "abusefilter_rules", "governance_stats");
  s.governance_stats.blocked_accounts = optional_count(gov, "blocked_accounts", "governance_stats");
  s.governance_stats.total_accounts = optional_count(gov, "total_accounts", "governance_stats");
  s.governance_stats.deletion_requests = optional_count(gov, "deletion_requests", "governance_stats");
  s.governance_stats.steward_requests = optional_count(gov, "steward_requests", "governance_stats");

  const Json& dists = field(j, "distributions", where);
  if (!dists.is_array()) fail(ErrorCode::ParseError, "distributions: expected an array");
  for (const auto& d : dists) s.distributions.push_back(distribution_from_json(d));

  const Json& scores = field(j, "external_scores", where);
  if (!scores.is_object()) fail(ErrorCode::ParseError, "external_scores: expected an object");
  for (auto it = scores.begin(); it != scores.end(); ++it) {
    if (!it.value().is_object()) {
      fail(ErrorCode::ParseError, "external_scores." + it.key() + ": expected an object");
    }
    ScoreTable table;
    for (auto e = it.value().begin(); e != it.value().end(); ++e) {
      table.emplace(e.key(), as_real(e.value(), "external_scores." + it.key() + "." + e.key()));
    }
    s.external_scores.emplace(it.key(), std::move(table));
  }

  const Json& warnings = field(j, "warnings", where);
  if (!warnings.is_array()) fail(ErrorCode::ParseError, "warnings: expected an array");
  for (const auto& w : warnings) s.warnings.push_back(as_string(w, "warnings[]"));

  if (const Json* origin = optional_field(j, "fixture_origin")) {
    if (!origin->is_boolean()) fail(ErrorCode::ParseError, "fixture_origin: expected a boolean");
    s.fixture_origin = origin->get<bool>();
  }

  try {
    s.validate();
  } catch (const Error& e) {
    fail(ErrorCode::ParseError, std::string("snapshot invariant: ") + e.what());
  }
  return s;
}

Json to_json(const metrics::EntropyValue& e) {
  return Json{{"nats", e.nats},
              {"support_size", e.support_size},
              {"base", std::string(base_name(e.base))}};
}

Json to_json(const IndicatorValue& v) {
  Json value;
  switch (v.kind) {
    case ValueKind::Count: value = std::get<std::uint64_t>(v.value); break;
    case ValueKind::Ratio:
    case ValueKind::Score: value = std::get<double>(v.value); break;
    case ValueKind::Distribution: {
      value = Json::object();
      for (const auto& [k, p] : std::get<Distribution>(v.value)) value[k] = p;
      break;
    }
    case ValueKind::Entropy: value = to_json(std::get<metrics::EntropyValue>(v.value)); break;
  }
  Json provenance{{"snapshot_ids", v.provenance.snapshot_ids},
                  {"method_version", v.provenance.method_version},
                  {"computed_at", format_timestamp(v.provenance.computed_at)}};
  if (v.provenance.log_base) provenance["log_base"] = std::string(base_name(*v.provenance.log_base));
  if (v.provenance.coverage) provenance["coverage"] = *v.provenance.coverage;
  return Json{{"indicator_id", v.indicator_id},
              {"wiki", v.wiki.slug()},
              {"window", v.window.label()},
              {"kind", std::string(to_string(v.kind))},
              {"value", std::move(value)},
              {"provenance", std::move(provenance)}};
}

IndicatorValue indicator_value_from_json(const Json& j) {
  constexpr std::string_view where = "indicator_value";
  IndicatorValue v;
  v.indicator_id = as_string(field(j, "indicator_id", where), "indicator_id");
  v.wiki = WikiId::from_slug(as_string(field(j, "wiki", where), "wiki"));
  v.window = MonthWindow::parse(as_string(field(j, "window", where), "window"));
  const auto kind = as_string(field(j, "kind", where), "kind");
  auto parsed = parse_value_kind(kind);
  if (!parsed) fail(ErrorCode::ParseError, "indicator_value: unknown kind '" + kind + "'");
  v.kind = *parsed;
  const Json& value = field(j, "value", where);
  switch (v.kind) {
    case ValueKind::Count: v.value = as_count(value, "value"); break;
    case ValueKind::Ratio:
    case ValueKind::Score: v.value = as_real(value, "value"); break;
    case ValueKind::Distribution: {
      if (!value.is_object()) fail(ErrorCode::ParseError, "value: expected an object");
      Distribution d;
      for (auto it = value.begin(); it != value.end(); ++it) d.emplace(it.key(), as_real(it.value(), "value"));
      v.value = std::move(d);
      break;
    }
    case ValueKind::Entropy: {
      metrics::EntropyValue e;
      e.nats = as_real(field(value, "nats", "value"), "value.nats");
      e.support_size = as_count(field(value, "support_size", "value"), "value.support_size");
      e.base = base_from(field(value, "base", "value"));
      v.value = e;
      break;
    }
  }
  const Json& p = field(j, "provenance", where);
  for (const auto& id : field(p, "snapshot_ids", "provenance")) {
    v.provenance.snapshot_ids.push_back(as_string(id, "snapshot_ids[]"));
  }
  v.provenance.method_version =
      static_cast<int>(as_count(field(p, "method_version", "provenance"), "method_version"));
  v.provenance.computed_at = parse_timestamp(as_string(field(p, "computed_at", "provenance"), "computed_at"));
  if (const Json* b = optional_field(p, "log_base")) v.provenance.log_base = base_from(*b);
  if (const Json* c = optional_field(p, "coverage")) v.provenance.coverage = as_real(*c, "coverage");
  v.validate();
  return v;
}

Json to_json(const CategoryRiskScore& s) {
  Json contributing = Json::array();
  for (const auto& c : s.contributing) {
    contributing.push_back(Json{{"indicator_id", c.indicator_id}, {"risk_percentile", c.risk_percentile}});
  }
  return Json{{"wiki", s.wiki.slug()},
              {"category", std::string(to_string(s.category))},
              {"score", s.score},
              {"contributing", std::move(contributing)},
              {"cohort", s.cohort},
              {"coverage", s.coverage}};
}

CategoryRiskScore category_score_from_json(const Json& j) {
  constexpr std::string_view where = "category_score";
  CategoryRiskScore s;
  s.wiki = WikiId::from_slug(as_string(field(j, "wiki", where), "wiki"));
  const auto cat = as_string(field(j, "category", where), "category");
  auto parsed = parse_category(cat);
  if (!parsed) fail(ErrorCode::ParseError, "unknown category '" + cat + "'");
  s.category = *parsed;
  s.score = as_real(field(j, "score", where), "score");
  for (const auto& c : field(j, "contributing", where)) {
    s.contributing.push_back(Contribution{as_string(field(c, "indicator_id", "contributing"), "indicator_id"),
                                          as_real(field(c, "risk_percentile", "contributing"), "risk_percentile")});
  }
  for (const auto& w : field(j, "cohort", where)) s.cohort.push_back(as_string(w, "cohort[]"));
  s.coverage = as_real(field(j, "coverage", where), "coverage");
  return s;
}

Json to_json(const IndicatorDefinition& d) {
  Json sources = Json::array();
  for (auto s : d.required_sources) sources.push_back(std::string(to_string(s)));
  return Json{{"id", d.id},
              {"display_name", d.display_name},
              {"category", std::string(to_string(d.category))},
              {"value_kind", std::string(to_string(d.value_kind))},
              {"risk_polarity", std::string(to_string(d.risk_polarity))},
              {"required_sources", std::move(sources)},
              {"method_version", d.method_version},
              {"stub_backed", d.stub_backed()}};
}

IndicatorDefinition indicator_definition_from_json(const Json& j) {
  constexpr std::string_view where = "indicator_definition";
  IndicatorDefinition d;
  d.id = as_string(field(j, "id", where), "id");
  d.display_name = as_string(field(j, "display_name", where), "display_name");
  auto cat = parse_category(as_string(field(j, "category", where), "category"));
  auto kind = parse_value_kind(as_string(field(j, "value_kind", where), "value_kind"));
  auto pol = parse_polarity(as_string(field(j, "risk_polarity", where), "risk_polarity"));
  if (!cat || !kind || !pol) fail(ErrorCode::ParseError, "indicator_definition '" + d.id + "': bad enum value");
  d.category = *cat;
  d.value_kind = *kind;
  d.risk_polarity = *pol;
  for (const auto& s : field(j, "required_sources", where)) {
    auto src = parse_source_kind(as_string(s, "required_sources[]"));
    if (!src) fail(ErrorCode::ParseError, "indicator_definition '" + d.id + "': unknown source");
    d.required_sources.insert(*src);
  }
  d.method_version = static_cast<int>(as_count(field(j, "method_version", where), "method_version"));
  return d;
}

Json taxonomy_json() {
  Json categories = Json::array();
  for (const auto& c : taxonomy()) {
    categories.push_back(Json{{"id", std::string(c.key)},
                              {"display_name", std::string(c.display_name)},
                              {"origin", std::string(to_string(c.origin))},
                              {"subgroup", std::string(to_string(c.subgroup))}});
  }
  return Json{{"categories", std::move(categories)}};
}

Json registry_json(const IndicatorRegistry& registry) {
  Json items = Json::array();
  for (const auto& d : registry.definitions()) items.push_back(to_json(d));
  return Json{{"indicators", std::move(items)}};
}

Json indicators_document(const WikiId& wiki, const MonthWindow& window,
                         const std::vector<IndicatorValue>& values) {
  Json items = Json::array();
  for (const auto& v : values) items.push_back(to_json(v));
  return Json{{"wiki", wiki.slug()}, {"window", window.label()}, {"values", std::move(items)}};
}

std::vector<IndicatorValue> values_from_document(const Json& doc) {
  std::vector<IndicatorValue> out;
  for (const auto& v : field(doc, "values", "indicators document")) {
    out.push_back(indicator_value_from_json(v));
  }
  return out;
}

}  // namespace kiro::json_io
