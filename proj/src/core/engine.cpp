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

#include "kiro/engine.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <future>
#include <sstream>

#include "kiro/error.hpp"

namespace kiro::engine {
namespace {

using json_io::Json;
using Method = std::function<std::optional<IndicatorPayload>(const WikiSnapshot&, const EngineContext&)>;

std::optional<double> score_of(const WikiSnapshot& s, std::string_view provider, const std::string& key) {
  const ScoreTable* t = s.provider(provider);
  if (!t) return std::nullopt;
  auto it = t->find(key);
  if (it == t->end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint64_t> count_of(const WikiSnapshot& s, std::string_view provider, const std::string& key) {
  auto v = score_of(s, provider, key);
  if (!v || *v < 0.0) return std::nullopt;
  return static_cast<std::uint64_t>(std::llround(*v));
}

std::optional<std::uint64_t> group(const WikiSnapshot& s, std::string_view name) {
  auto it = s.group_counts.find(std::string(name));
  if (it == s.group_counts.end()) return std::nullopt;
  return it->second;
}

std::optional<IndicatorPayload> from_ratio(std::optional<double> r) {
  if (!r) return std::nullopt;
  return IndicatorPayload{*r};
}

std::optional<IndicatorPayload> from_count(std::optional<std::uint64_t> c) {
  if (!c) return std::nullopt;
  return IndicatorPayload{*c};
}

std::optional<std::map<std::string, double>> with_mass(std::optional<std::map<std::string, double>> m) {
  if (!m) return std::nullopt;
  const bool any = std::any_of(m->begin(), m->end(), [](const auto& kv) { return kv.second > 0.0; });
  return any ? m : std::nullopt;
}

std::optional<std::map<std::string, double>> media_table(const WikiSnapshot& s) {
  const ScoreTable* t = s.provider(kMediaReferralsProvider);
  if (!t) return std::nullopt;
  return with_mass(std::map<std::string, double>(t->begin(), t->end()));
}

Method distribution_of(std::function<std::optional<std::map<std::string, double>>(const WikiSnapshot&)> source) {
  return [source](const WikiSnapshot& s, const EngineContext&) -> std::optional<IndicatorPayload> {
    auto m = with_mass(source(s));
    if (!m) return std::nullopt;
    return IndicatorPayload{Distribution(metrics::normalize(*m).entries())};
  };
}

Method entropy_of(std::function<std::optional<std::map<std::string, double>>(const WikiSnapshot&)> source) {
  return [source](const WikiSnapshot& s, const EngineContext& ctx) -> std::optional<IndicatorPayload> {
    auto m = with_mass(source(s));
    if (!m) return std::nullopt;
    return IndicatorPayload{metrics::shannon_entropy(metrics::normalize(*m), ctx.log_base)};
  };
}

Method democracy_of(CountrySubject subject) {
  return [subject](const WikiSnapshot& s, const EngineContext& ctx) -> std::optional<IndicatorPayload> {
    if (ctx.democracy_index.empty()) return std::nullopt;
    auto m = with_mass(s.summed(subject));
    if (!m) return std::nullopt;
    const auto d = metrics::democratic_quality_score(metrics::normalize(*m), ctx.democracy_index);
    if (!d.score) return std::nullopt;
    return IndicatorPayload{*d.score};
  };
}

auto summed(CountrySubject subject) {
  return [subject](const WikiSnapshot& s) { return s.summed(subject); };
}

const std::map<std::string, Method, std::less<>>& methods() {
  static const std::map<std::string, Method, std::less<>> table{
      {"articles", [](const WikiSnapshot& s, const EngineContext&) { return from_count(s.site_stats.articles); }},
      {"editors", [](const WikiSnapshot& s, const EngineContext&) { return from_count(s.site_stats.editors); }},
      {"active_editors",
       [](const WikiSnapshot& s, const EngineContext&) { return from_count(s.site_stats.active_editors); }},
      {"elevated_editors",
       [](const WikiSnapshot& s, const EngineContext&) { return from_count(group(s, kElevatedAny)); }},
      {"active_elevated_ratio",
       [](const WikiSnapshot& s, const EngineContext&) -> std::optional<IndicatorPayload> {
         auto active = group(s, kElevatedActive);
         if (!active) return std::nullopt;
         return from_ratio(metrics::ratio(*active, s.site_stats.active_editors));
       }},
      {"patrolling_tools",
       [](const WikiSnapshot& s, const EngineContext&) {
         return from_count(count_of(s, kCuratedProvider, "patrolling_tools"));
       }},
      {"abusefilter_rules",
       [](const WikiSnapshot& s, const EngineContext&) { return from_count(s.governance_stats.abusefilter_rules); }},
      {"steward_requests",
       [](const WikiSnapshot& s, const EngineContext&) { return from_count(s.governance_stats.steward_requests); }},
      {"stewards_with_language",
       [](const WikiSnapshot& s, const EngineContext&) {
         return from_count(count_of(s, kCuratedProvider, "stewards_with_language"));
       }},
      {"deletion_request_ratio",
       [](const WikiSnapshot& s, const EngineContext&) -> std::optional<IndicatorPayload> {
         if (!s.governance_stats.deletion_requests) return std::nullopt;
         return from_ratio(metrics::ratio(*s.governance_stats.deletion_requests, s.site_stats.articles));
       }},
      {"blocked_account_ratio",
       [](const WikiSnapshot& s, const EngineContext&) -> std::optional<IndicatorPayload> {
         const auto& g = s.governance_stats;
         if (!g.blocked_accounts || !g.total_accounts) return std::nullopt;
         return from_ratio(metrics::ratio(*g.blocked_accounts, *g.total_accounts));
       }},
      {"edits_by_country", distribution_of(summed(CountrySubject::Edits))},
      {"views_by_country", distribution_of(summed(CountrySubject::Views))},
      {"edits_by_country_entropy", entropy_of(summed(CountrySubject::Edits))},
      {"views_by_country_entropy", entropy_of(summed(CountrySubject::Views))},
      {"active_editors_by_country_entropy", entropy_of(summed(CountrySubject::ActiveEditors))},
      {"reliable_source_share",
       [](const WikiSnapshot& s, const EngineContext&) {
         return from_ratio(score_of(s, "source_reliability", "reliable_share"));
       }},
      {"unreferenced_article_ratio",
       [](const WikiSnapshot& s, const EngineContext&) {
         return from_ratio(score_of(s, "citations", "unreferenced_share"));
       }},
      {"stub_ratio",
       [](const WikiSnapshot& s, const EngineContext&) -> std::optional<IndicatorPayload> {
         if (!s.site_stats.stub_articles) return std::nullopt;
         return from_ratio(metrics::ratio(*s.site_stats.stub_articles, s.site_stats.articles));
       }},
      {"editing_depth",
       [](const WikiSnapshot& s, const EngineContext&) -> std::optional<IndicatorPayload> {
         const auto& st = s.site_stats;
         if (!st.stub_articles) return std::nullopt;
         auto stub = metrics::ratio(*st.stub_articles, st.articles);
         if (!stub) return std::nullopt;
         return from_ratio(metrics::editing_depth(st.edits, st.articles, st.total_pages, *stub));
       }},
      {"ores_quality_score",
       [](const WikiSnapshot& s, const EngineContext&) {
         return from_ratio(score_of(s, "ores_quality", "mean_quality"));
       }},
      {"protected_article_ratio",
       [](const WikiSnapshot& s, const EngineContext&) -> std::optional<IndicatorPayload> {
         auto n = count_of(s, "protection", "protected_articles");
         if (!n) return std::nullopt;
         return from_ratio(metrics::ratio(*n, s.site_stats.articles));
       }},
      {"controversial_article_share",
       [](const WikiSnapshot& s, const EngineContext&) {
         return from_ratio(score_of(s, "controversiality", "controversial_share"));
       }},
      {"referral_sources", distribution_of(media_table)},
      {"social_media_referral_share",
       [](const WikiSnapshot& s, const EngineContext&) -> std::optional<IndicatorPayload> {
         auto m = media_table(s);
         if (!m) return std::nullopt;
         return IndicatorPayload{metrics::normalize(*m).probability("social_media")};
       }},
      {"referral_source_entropy", entropy_of(media_table)},
      {"views_democratic_quality", democracy_of(CountrySubject::Views)},
      {"edits_democratic_quality", democracy_of(CountrySubject::Edits)},
  };
  return table;
}

bool payload_matches(ValueKind kind, const IndicatorPayload& p) {
  switch (kind) {
    case ValueKind::Count: return std::holds_alternative<std::uint64_t>(p);
    case ValueKind::Ratio:
    case ValueKind::Score: return std::holds_alternative<double>(p);
    case ValueKind::Distribution: return std::holds_alternative<Distribution>(p);
    case ValueKind::Entropy: return std::holds_alternative<metrics::EntropyValue>(p);
  }
  return false;
}

bool rankable(const IndicatorDefinition& d) { return d.value_kind != ValueKind::Distribution; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::FileNotFound, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::map<std::string, double> load_democracy_index(const std::string& path) {
  const Json j = json_io::parse(read_file(path), path);
  if (!j.is_object() || !j.contains("scores") || !j["scores"].is_object()) {
    fail(ErrorCode::ParseError, path + ": expected {\"scores\": {...}}");
  }
  std::map<std::string, double> out;
  for (auto it = j["scores"].begin(); it != j["scores"].end(); ++it) {
    if (!is_country_code(it.key())) fail(ErrorCode::ParseError, path + ": bad country code '" + it.key() + "'");
    if (!it.value().is_number()) fail(ErrorCode::ParseError, path + ": non-numeric score for " + it.key());
    const double v = it.value().get<double>();
    if (!(v >= 0.0 && v <= 1.0)) fail(ErrorCode::ParseError, path + ": score outside [0,1] for " + it.key());
    out.emplace(it.key(), v);
  }
  return out;
}

std::optional<IndicatorValue> compute_indicator(const IndicatorDefinition& def,
                                                const WikiSnapshot& snapshot,
                                                const EngineContext& ctx) {
  auto it = methods().find(def.id);
  if (it == methods().end()) {
    fail(ErrorCode::UnknownIndicator, "no computation registered for indicator '" + def.id + "'");
  }
  auto payload = it->second(snapshot, ctx);
  if (!payload) return std::nullopt;
  if (!payload_matches(def.value_kind, *payload)) {
    fail(ErrorCode::KindMismatch, "indicator '" + def.id + "' declared " +
                                      std::string(to_string(def.value_kind)) +
                                      " but the snapshot data yields a different kind");
  }

  IndicatorValue v;
  v.indicator_id = def.id;
  v.wiki = snapshot.wiki;
  v.window = snapshot.window;
  v.kind = def.value_kind;
  v.value = std::move(*payload);
  v.provenance.snapshot_ids = {snapshot.id()};
  v.provenance.method_version = def.method_version;
  v.provenance.computed_at = snapshot.captured_at;
  if (def.value_kind == ValueKind::Entropy) v.provenance.log_base = ctx.log_base;
  if (def.id == "views_democratic_quality" || def.id == "edits_democratic_quality") {
    auto m = snapshot.summed(def.id == "views_democratic_quality" ? CountrySubject::Views : CountrySubject::Edits);
    v.provenance.coverage = metrics::democratic_quality_score(metrics::normalize(*m), ctx.democracy_index).coverage;
  }
  v.validate();
  return v;
}

std::vector<IndicatorValue> compute_all(const IndicatorRegistry& registry, const WikiSnapshot& snapshot,
                                        const EngineContext& ctx) {
  std::vector<IndicatorValue> out;
  for (const auto& def : registry.definitions()) {
    if (auto v = compute_indicator(def, snapshot, ctx)) out.push_back(std::move(*v));
  }
  return out;
}

double risk_percentile(const IndicatorDefinition& def, double value, std::span<const double> cohort_values) {
  const double p = metrics::percentile_rank(value, cohort_values);
  return def.risk_polarity == RiskPolarity::HigherIsRiskier ? p : 1.0 - p;
}

CohortValues index_values(const std::vector<std::vector<IndicatorValue>>& per_wiki) {
  CohortValues out;
  for (const auto& values : per_wiki) {
    for (const auto& v : values) out[v.wiki.slug()].insert_or_assign(v.indicator_id, v);
  }
  return out;
}

std::optional<CategoryRiskScore> category_score(const WikiId& wiki, RiskCategory category,
                                                const IndicatorRegistry& registry,
                                                const CohortValues& cohort) {
  auto own = cohort.find(wiki.slug());
  std::size_t defined = 0;
  CategoryRiskScore out;
  out.wiki = wiki;
  out.category = category;
  for (const auto& [slug, _] : cohort) out.cohort.push_back(slug);

  double sum = 0.0;
  for (const auto* def : registry.in_category(category)) {
    if (!rankable(*def)) continue;
    ++defined;
    if (own == cohort.end()) continue;
    auto mine = own->second.find(def->id);
    if (mine == own->second.end()) continue;
    std::vector<double> values;
    for (const auto& [slug, by_id] : cohort) {
      if (auto v = by_id.find(def->id); v != by_id.end()) {
        if (auto x = v->second.scalar()) values.push_back(*x);
      }
    }
    const double p = risk_percentile(*def, *mine->second.scalar(), values);
    out.contributing.push_back(Contribution{def->id, p});
    sum += p;
  }
  if (out.contributing.empty()) return std::nullopt;
  out.score = sum / static_cast<double>(out.contributing.size());
  out.coverage = static_cast<double>(out.contributing.size()) / static_cast<double>(defined);
  return out;
}

std::vector<RankedEntry> rank_wikis(const IndicatorDefinition& def, std::span<const IndicatorValue> values) {
  if (values.empty()) fail(ErrorCode::InvalidArgument, "rank_wikis: no values for '" + def.id + "'");
  if (!rankable(def)) fail(ErrorCode::KindMismatch, "distribution indicator '" + def.id + "' cannot be ranked");
  std::vector<double> cohort;
  for (const auto& v : values) {
    if (v.indicator_id != def.id) fail(ErrorCode::InvalidArgument, "rank_wikis: mixed indicators");
    cohort.push_back(*v.scalar());
  }
  std::vector<RankedEntry> out;
  for (const auto& v : values) {
    const double x = *v.scalar();
    out.push_back(RankedEntry{v.wiki, x, risk_percentile(def, x, cohort)});
  }
  std::sort(out.begin(), out.end(), [](const RankedEntry& a, const RankedEntry& b) {
    if (a.risk_percentile != b.risk_percentile) return a.risk_percentile > b.risk_percentile;
    return a.wiki.slug() < b.wiki.slug();
  });
  return out;
}

ScatterResult entropy_scatter(std::span<const WikiSnapshot> snapshots, std::uint64_t min_articles) {
  ScatterResult out;
  out.min_articles = min_articles;
  std::set<std::string> seen;
  for (const auto& s : snapshots) {
    if (!seen.insert(s.wiki.slug()).second) {
      fail(ErrorCode::InvalidArgument, "entropy_scatter: two snapshots for " + s.wiki.slug());
    }
    if (!out.window) out.window = s.window;
    if (s.site_stats.articles <= min_articles) continue;
    auto edits = with_mass(s.summed(CountrySubject::Edits));
    auto views = with_mass(s.summed(CountrySubject::Views));
    if (!edits || !views) continue;
    out.points.push_back(ScatterPoint{s.wiki, metrics::shannon_entropy(metrics::normalize(*edits)).nats,
                                      metrics::shannon_entropy(metrics::normalize(*views)).nats,
                                      s.site_stats.articles});
  }
  std::sort(out.points.begin(), out.points.end(),
            [](const ScatterPoint& a, const ScatterPoint& b) { return a.wiki.slug() < b.wiki.slug(); });
  if (out.points.size() < 2) {
    fail(ErrorCode::InsufficientData, "entropy scatter needs at least two wikis over " +
                                          std::to_string(min_articles) + " articles with both distributions (" +
                                          std::to_string(out.points.size()) + " qualify)");
  }
  std::vector<metrics::Point> xy;
  for (const auto& p : out.points) xy.push_back({p.edit_entropy, p.view_entropy});
  out.fit = metrics::linear_fit(xy);
  return out;
}

std::map<Month, metrics::EntropyValue> monthly_entropies(const WikiSnapshot& snapshot, CountrySubject subject) {
  std::map<Month, std::map<std::string, double>> by_month;
  for (const auto& d : snapshot.distributions) {
    if (d.subject != subject) continue;
    for (const auto& [code, m] : d.entries) by_month[d.window.start][code] += m;
  }
  std::map<Month, metrics::EntropyValue> out;
  for (const auto& [month, m] : by_month) {
    if (auto masses = with_mass(m)) out.emplace(month, metrics::shannon_entropy(metrics::normalize(*masses)));
  }
  return out;
}

RiskMatrix build_risk_matrix(std::span<const WikiSnapshot> snapshots, const IndicatorRegistry& registry,
                             const EngineContext& ctx) {
  if (snapshots.empty()) fail(ErrorCode::InvalidArgument, "build_risk_matrix: no snapshots");
  std::vector<const WikiSnapshot*> ordered;
  for (const auto& s : snapshots) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(),
            [](const WikiSnapshot* a, const WikiSnapshot* b) { return a->wiki.slug() < b->wiki.slug(); });
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    if (ordered[i]->wiki.slug() == ordered[i - 1]->wiki.slug()) {
      fail(ErrorCode::InvalidArgument, "build_risk_matrix: two snapshots for " + ordered[i]->wiki.slug());
    }
  }

  RiskMatrix m;
  m.window = ordered.front()->window;
  std::vector<std::future<std::vector<IndicatorValue>>> jobs;
  for (const auto* s : ordered) {
    m.wikis.push_back(s->wiki);
    jobs.push_back(std::async(std::launch::async, [&registry, &ctx, s] { return compute_all(registry, *s, ctx); }));
  }
  for (auto& j : jobs) m.values.push_back(j.get());

  const CohortValues cohort = index_values(m.values);
  for (const auto& wiki : m.wikis) {
    std::array<std::optional<CategoryRiskScore>, kCategoryCount> row;
    for (const auto& c : taxonomy()) {
      auto score = category_score(wiki, c.id, registry, cohort);
      if (score) {
        score->cohort.clear();
        for (const auto& w : m.wikis) score->cohort.push_back(w.slug());
      }
      row[index_of(c.id)] = std::move(score);
    }
    m.rows.push_back(std::move(row));
  }
  return m;
}

Json to_json(const RiskMatrix& m) {
  Json wikis = Json::array();
  for (const auto& w : m.wikis) wikis.push_back(w.slug());
  Json categories = Json::array();
  for (const auto& c : taxonomy()) categories.push_back(std::string(c.key));
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.wikis.size(); ++i) {
    Json cells = Json::array();
    for (const auto& cell : m.rows[i]) cells.push_back(cell ? json_io::to_json(*cell) : Json(nullptr));
    rows.push_back(Json{{"wiki", m.wikis[i].slug()}, {"cells", std::move(cells)}});
  }
  return Json{{"window", m.window.label()},
              {"wikis", std::move(wikis)},
              {"categories", std::move(categories)},
              {"rows", std::move(rows)}};
}

Json to_json(const ScatterResult& s) {
  Json points = Json::array();
  for (const auto& p : s.points) {
    points.push_back(Json{{"wiki", p.wiki.slug()},
                          {"edit_entropy", p.edit_entropy},
                          {"view_entropy", p.view_entropy},
                          {"articles", p.articles}});
  }
  Json parameters{{"min_articles", s.min_articles}, {"log_base", "e"}};
  parameters["window"] = s.window ? Json(s.window->label()) : Json(nullptr);
  return Json{{"parameters", std::move(parameters)},
              {"points", std::move(points)},
              {"fit", Json{{"slope", s.fit.slope},
                           {"intercept", s.fit.intercept},
                           {"r_squared", s.fit.r_squared},
                           {"n_points", s.fit.n_points}}}};
}

Json rankings_json(const IndicatorDefinition& def, const MonthWindow& window, const std::vector<RankedEntry>& ranked) {
  Json items = Json::array();
  for (const auto& r : ranked) {
    items.push_back(Json{{"wiki", r.wiki.slug()}, {"value", r.value}, {"risk_percentile", r.risk_percentile}});
  }
  return Json{{"indicator_id", def.id},
              {"window", window.label()},
              {"risk_polarity", std::string(to_string(def.risk_polarity))},
              {"items", std::move(items)}};
}

}  // namespace kiro::engine
