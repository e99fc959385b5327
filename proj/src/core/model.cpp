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

#include "kiro/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "kiro/error.hpp"

namespace kiro {
namespace {

constexpr std::array<CategoryInfo, kCategoryCount> kTaxonomy{{
    {RiskCategory::CommunityCapacity, RiskOrigin::Internal, RiskSubgroup::Community,
     "community_capacity", "Community capacity"},
    {RiskCategory::CommunityGovernance, RiskOrigin::Internal, RiskSubgroup::Community,
     "community_governance", "Community governance"},
    {RiskCategory::CommunityDemographics, RiskOrigin::Internal, RiskSubgroup::Community,
     "community_demographics", "Community demographics"},
    {RiskCategory::ContentVerifiability, RiskOrigin::Internal, RiskSubgroup::Content,
     "content_verifiability", "Content verifiability"},
    {RiskCategory::ContentQuality, RiskOrigin::Internal, RiskSubgroup::Content, "content_quality",
     "Content quality"},
    {RiskCategory::ContentControversiality, RiskOrigin::Internal, RiskSubgroup::Content,
     "content_controversiality", "Content controversiality"},
    {RiskCategory::Media, RiskOrigin::External, RiskSubgroup::None, "media", "Media"},
    {RiskCategory::Geopolitics, RiskOrigin::External, RiskSubgroup::None, "geopolitics",
     "Geopolitics"},
}};

static_assert([] {
  for (const auto& c : kTaxonomy) {
    if (c.origin != origin_of(c.id) || c.subgroup != subgroup_of(c.id)) return false;
  }
  return true;
}());

template <typename E, std::size_t N>
std::optional<E> parse_enum(std::string_view text, const std::array<std::string_view, N>& names) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == text) return static_cast<E>(i);
  }
  return std::nullopt;
}

constexpr std::array<std::string_view, 5> kValueKindNames{"count", "ratio", "distribution",
                                                           "entropy", "score"};
constexpr std::array<std::string_view, 2> kPolarityNames{"higher_is_riskier", "lower_is_riskier"};
constexpr std::array<std::string_view, 8> kSourceNames{
    "site_info",           "user_groups",        "abuse_filters",     "blocks",
    "pageviews_by_country", "editors_by_country", "external_provider", "media_referrals"};
constexpr std::array<std::string_view, 3> kSubjectNames{"edits", "views", "active_editors"};

int parse_int(std::string_view text, std::string_view what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    fail(ErrorCode::ParseError, "malformed " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return value;
}

IndicatorDefinition def(std::string id, std::string name, RiskCategory category, ValueKind kind,
                        RiskPolarity polarity, std::set<SourceKind> sources) {
  return IndicatorDefinition{std::move(id), std::move(name), category, kind, polarity,
                             std::move(sources), 1};
}

}  // namespace

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::EmptyDistribution: return "empty_distribution";
    case ErrorCode::EmptyCohort: return "empty_cohort";
    case ErrorCode::DegenerateFit: return "degenerate_fit";
    case ErrorCode::InsufficientData: return "insufficient_data";
    case ErrorCode::KindMismatch: return "kind_mismatch";
    case ErrorCode::UnknownIndicator: return "unknown_indicator";
    case ErrorCode::NetworkError: return "network_error";
    case ErrorCode::ParseError: return "parse_error";
    case ErrorCode::UnknownWiki: return "unknown_wiki";
    case ErrorCode::NoData: return "no_data";
    case ErrorCode::HardFailure: return "hard_failure";
    case ErrorCode::SchemaVersionMismatch: return "schema_version_mismatch";
    case ErrorCode::FileNotFound: return "file_not_found";
    case ErrorCode::Conflict: return "conflict";
    case ErrorCode::SchemaViolation: return "schema_violation";
    case ErrorCode::IntegrityError: return "integrity_error";
    case ErrorCode::IoError: return "io_error";
    case ErrorCode::BindError: return "bind_error";
    case ErrorCode::StoreUnavailable: return "store_unavailable";
    case ErrorCode::ConfigError: return "config_error";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()));
  return buf;
}

Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  // YYYY-MM-DDTHH:MM:SSZ
  if (text.size() != 20 || text[4] != '-' || text[7] != '-' || text[10] != 'T' ||
      text[13] != ':' || text[16] != ':' || text[19] != 'Z') {
    fail(ErrorCode::ParseError, "malformed timestamp '" + std::string(text) + "'");
  }
  const int y = parse_int(text.substr(0, 4), "timestamp");
  const int mo = parse_int(text.substr(5, 2), "timestamp");
  const int d = parse_int(text.substr(8, 2), "timestamp");
  const int h = parse_int(text.substr(11, 2), "timestamp");
  const int mi = parse_int(text.substr(14, 2), "timestamp");
  const int s = parse_int(text.substr(17, 2), "timestamp");
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) {
    fail(ErrorCode::ParseError, "timestamp out of range '" + std::string(text) + "'");
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

// ---------------------------------------------------------------------------

std::span<const CategoryInfo, kCategoryCount> taxonomy() noexcept { return kTaxonomy; }

const CategoryInfo& lookup(RiskCategory c) noexcept { return kTaxonomy[index_of(c)]; }

std::string_view to_string(RiskCategory c) noexcept { return lookup(c).key; }

std::string_view to_string(RiskOrigin o) noexcept {
  return o == RiskOrigin::Internal ? "internal" : "external";
}

std::string_view to_string(RiskSubgroup s) noexcept {
  switch (s) {
    case RiskSubgroup::Community: return "community";
    case RiskSubgroup::Content: return "content";
    case RiskSubgroup::None: return "none";
  }
  return "none";
}

std::optional<RiskCategory> parse_category(std::string_view key) noexcept {
  for (const auto& c : kTaxonomy) {
    if (c.key == key) return c.id;
  }
  return std::nullopt;
}

std::string_view to_string(ValueKind k) noexcept { return kValueKindNames[static_cast<std::size_t>(k)]; }
std::string_view to_string(RiskPolarity p) noexcept { return kPolarityNames[static_cast<std::size_t>(p)]; }
std::string_view to_string(SourceKind s) noexcept { return kSourceNames[static_cast<std::size_t>(s)]; }
std::string_view to_string(CountrySubject s) noexcept { return kSubjectNames[static_cast<std::size_t>(s)]; }

std::optional<ValueKind> parse_value_kind(std::string_view s) noexcept {
  return parse_enum<ValueKind>(s, kValueKindNames);
}
std::optional<RiskPolarity> parse_polarity(std::string_view s) noexcept {
  return parse_enum<RiskPolarity>(s, kPolarityNames);
}
std::optional<SourceKind> parse_source_kind(std::string_view s) noexcept {
  return parse_enum<SourceKind>(s, kSourceNames);
}
std::optional<CountrySubject> parse_subject(std::string_view s) noexcept {
  return parse_enum<CountrySubject>(s, kSubjectNames);
}

bool yields_distribution(SourceKind s) noexcept {
  return s == SourceKind::PageviewsByCountry || s == SourceKind::EditorsByCountry ||
         s == SourceKind::MediaReferrals;
}

// ---------------------------------------------------------------------------

IndicatorRegistry::IndicatorRegistry(std::vector<IndicatorDefinition> definitions)
    : definitions_(std::move(definitions)) {
  std::set<std::string_view> seen;
  for (const auto& d : definitions_) {
    if (d.id.empty()) fail(ErrorCode::InvalidArgument, "indicator with empty id");
    if (!seen.insert(d.id).second) {
      fail(ErrorCode::InvalidArgument, "duplicate indicator id '" + d.id + "'");
    }
    if (d.value_kind == ValueKind::Distribution || d.value_kind == ValueKind::Entropy) {
      const bool ok = std::any_of(d.required_sources.begin(), d.required_sources.end(),
                                  yields_distribution);
      if (!ok) {
        fail(ErrorCode::InvalidArgument,
             "indicator '" + d.id + "' needs a distribution-yielding source");
      }
    }
  }
}

const IndicatorDefinition* IndicatorRegistry::find(std::string_view id) const noexcept {
  auto it = std::find_if(definitions_.begin(), definitions_.end(),
                         [&](const IndicatorDefinition& d) { return d.id == id; });
  return it == definitions_.end() ? nullptr : &*it;
}

const IndicatorDefinition& IndicatorRegistry::at(std::string_view id) const {
  if (const auto* d = find(id)) return *d;
  fail(ErrorCode::UnknownIndicator, "unknown indicator '" + std::string(id) + "'");
}

std::vector<const IndicatorDefinition*> IndicatorRegistry::in_category(RiskCategory c) const {
  std::vector<const IndicatorDefinition*> out;
  for (const auto& d : definitions_) {
    if (d.category == c) out.push_back(&d);
  }
  return out;
}

const IndicatorRegistry& default_registry() {
  using C = RiskCategory;
  using K = ValueKind;
  using S = SourceKind;
  constexpr auto higher = RiskPolarity::HigherIsRiskier;
  constexpr auto lower = RiskPolarity::LowerIsRiskier;
  static const IndicatorRegistry registry{{
      def("articles", "Number of articles", C::CommunityCapacity, K::Count, lower, {S::SiteInfo}),
      def("editors", "Number of editors", C::CommunityCapacity, K::Count, lower, {S::SiteInfo}),
      def("active_editors", "Number of active editors", C::CommunityCapacity, K::Count, lower,
          {S::SiteInfo}),
      def("elevated_editors", "Editors with elevated user rights", C::CommunityCapacity, K::Count,
          lower, {S::UserGroups}),
      def("active_elevated_ratio", "Ratio of active editors with elevated user rights",
          C::CommunityCapacity, K::Ratio, lower, {S::UserGroups, S::SiteInfo}),
      def("patrolling_tools", "Number of specialized patrolling tools", C::CommunityCapacity,
          K::Count, lower, {S::ExternalProvider}),
      def("abusefilter_rules", "Number of AbuseFilter rules", C::CommunityCapacity, K::Count, lower,
          {S::AbuseFilters}),

      def("steward_requests", "Requests in the stewards' noticeboard", C::CommunityGovernance,
          K::Count, higher, {S::ExternalProvider}),
      def("stewards_with_language", "Global stewards knowledgeable with the language",
          C::CommunityGovernance, K::Count, lower, {S::ExternalProvider}),
      def("deletion_request_ratio", "Ratio of articles for deletion", C::CommunityGovernance,
          K::Ratio, higher, {S::ExternalProvider, S::SiteInfo}),
      def("blocked_account_ratio", "Ratio of blocked accounts", C::CommunityGovernance, K::Ratio,
          higher, {S::Blocks, S::SiteInfo}),

      def("edits_by_country", "Distribution of edits by country", C::CommunityDemographics,
          K::Distribution, lower, {S::EditorsByCountry}),
      def("views_by_country", "Distribution of views by country", C::CommunityDemographics,
          K::Distribution, lower, {S::PageviewsByCountry}),
      def("edits_by_country_entropy", "Entropy of edits by country", C::CommunityDemographics,
          K::Entropy, lower, {S::EditorsByCountry}),
      def("views_by_country_entropy", "Entropy of views by country", C::CommunityDemographics,
          K::Entropy, lower, {S::PageviewsByCountry}),
      def("active_editors_by_country_entropy", "Entropy of active editors by country",
          C::CommunityDemographics, K::Entropy, lower, {S::EditorsByCountry}),

      def("reliable_source_share", "Share of citations to reliable sources",
          C::ContentVerifiability, K::Score, lower, {S::ExternalProvider}),
      def("unreferenced_article_ratio", "Ratio of articles without citations",
          C::ContentVerifiability, K::Ratio, higher, {S::ExternalProvider}),

      def("stub_ratio", "Ratio of stub articles", C::ContentQuality, K::Ratio, higher,
          {S::SiteInfo}),
      def("editing_depth", "Editing depth", C::ContentQuality, K::Ratio, lower, {S::SiteInfo}),
      def("ores_quality_score", "Mean predicted article quality", C::ContentQuality, K::Score,
          lower, {S::ExternalProvider}),

      def("protected_article_ratio", "Ratio of locked articles", C::ContentControversiality,
          K::Ratio, higher, {S::ExternalProvider, S::SiteInfo}),
      def("controversial_article_share", "Share of controversial articles",
          C::ContentControversiality, K::Ratio, higher, {S::ExternalProvider}),

      def("referral_sources", "Distribution of visits by referrer class", C::Media,
          K::Distribution, lower, {S::MediaReferrals}),
      def("social_media_referral_share", "Share of visits referred by social media", C::Media,
          K::Ratio, higher, {S::MediaReferrals}),
      def("referral_source_entropy", "Entropy of visits by referrer class", C::Media, K::Entropy,
          lower, {S::MediaReferrals}),

      def("views_democratic_quality", "Democratic quality of views by country", C::Geopolitics,
          K::Score, lower, {S::PageviewsByCountry}),
      def("edits_democratic_quality", "Democratic quality of edits by country", C::Geopolitics,
          K::Score, lower, {S::EditorsByCountry}),
  }};
  return registry;
}

// ---------------------------------------------------------------------------

Month Month::parse(std::string_view text) {
  if (text.size() != 7 || text[4] != '-') {
    fail(ErrorCode::ParseError, "malformed month '" + std::string(text) + "' (want YYYY-MM)");
  }
  Month m{parse_int(text.substr(0, 4), "month"), parse_int(text.substr(5, 2), "month")};
  if (m.month < 1 || m.month > 12) {
    fail(ErrorCode::ParseError, "month out of range in '" + std::string(text) + "'");
  }
  return m;
}

std::string Month::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
  return buf;
}

Month Month::next() const noexcept {
  return month == 12 ? Month{year + 1, 1} : Month{year, month + 1};
}

MonthWindow MonthWindow::parse(std::string_view label) {
  if (auto sep = label.find('_'); sep != std::string_view::npos) {
    MonthWindow w{Month::parse(label.substr(0, sep)), Month::parse(label.substr(sep + 1))};
    if (!(w.start < w.end)) fail(ErrorCode::ParseError, "empty window '" + std::string(label) + "'");
    return w;
  }
  return single(Month::parse(label));
}

std::string MonthWindow::label() const {
  if (end == start.next()) return start.to_string();
  return start.to_string() + "_" + end.to_string();
}

std::vector<Month> MonthWindow::months() const {
  std::vector<Month> out;
  for (Month m = start; m < end; m = m.next()) out.push_back(m);
  return out;
}

std::string WikiId::slug() const { return family == "wikipedia" ? code : code + "." + family; }

WikiId WikiId::from_slug(std::string_view slug) {
  if (slug.empty()) fail(ErrorCode::InvalidArgument, "empty wiki identifier");
  if (auto dot = slug.find('.'); dot != std::string_view::npos) {
    return WikiId{std::string(slug.substr(0, dot)), std::string(slug.substr(dot + 1))};
  }
  return WikiId{std::string(slug), "wikipedia"};
}

bool is_country_code(std::string_view code) noexcept {
  return code.size() == 2 && code[0] >= 'A' && code[0] <= 'Z' && code[1] >= 'A' && code[1] <= 'Z';
}

// ---------------------------------------------------------------------------

void CountryDistribution::validate(bool require_mass) const {
  bool any_mass = false;
  for (const auto& [code, magnitude] : entries) {
    if (!is_country_code(code)) fail(ErrorCode::InvalidArgument, "bad country code '" + code + "'");
    if (!std::isfinite(magnitude) || magnitude < 0.0) {
      fail(ErrorCode::InvalidArgument, "negative magnitude for country " + code);
    }
    any_mass = any_mass || magnitude > 0.0;
  }
  if (require_mass && !any_mass) {
    fail(ErrorCode::InvalidArgument,
         "empty " + std::string(to_string(subject)) + " distribution for " + window.label());
  }
}

double CountryDistribution::total() const noexcept {
  double t = 0.0;
  for (const auto& [_, m] : entries) t += m;
  return t;
}

void SiteStats::validate() const {
  if (articles > total_pages) fail(ErrorCode::InvalidArgument, "articles exceed total_pages");
  if (active_editors > editors) fail(ErrorCode::InvalidArgument, "active_editors exceed editors");
  if (stub_articles && *stub_articles > articles) {
    fail(ErrorCode::InvalidArgument, "stub_articles exceed articles");
  }
}

void GovernanceStats::validate() const {
  if (blocked_accounts && total_accounts && *blocked_accounts > *total_accounts) {
    fail(ErrorCode::InvalidArgument, "blocked_accounts exceed total_accounts");
  }
}

std::string WikiSnapshot::id() const {
  return wiki.slug() + "/" + window.label() + "@" + format_timestamp(captured_at);
}

void WikiSnapshot::validate() const {
  if (wiki.code.empty()) fail(ErrorCode::InvalidArgument, "snapshot without wiki code");
  if (!(window.start < window.end)) fail(ErrorCode::InvalidArgument, "snapshot with empty window");
  site_stats.validate();
  governance_stats.validate();
  for (const auto& d : distributions) {
    if (d.window.start < window.start || window.end < d.window.end) {
      fail(ErrorCode::InvalidArgument, "distribution window outside snapshot window");
    }
    d.validate();
  }
  for (const auto& [provider, table] : external_scores) {
    for (const auto& [key, v] : table) {
      if (!std::isfinite(v)) {
        fail(ErrorCode::InvalidArgument, "non-finite score " + provider + "." + key);
      }
    }
  }
}

std::optional<std::map<std::string, double>> WikiSnapshot::summed(CountrySubject subject) const {
  std::optional<std::map<std::string, double>> out;
  for (const auto& d : distributions) {
    if (d.subject != subject) continue;
    if (!out) out.emplace();
    for (const auto& [code, m] : d.entries) (*out)[code] += m;
  }
  return out;
}

const ScoreTable* WikiSnapshot::provider(std::string_view provider_id) const noexcept {
  auto it = external_scores.find(std::string(provider_id));
  return it == external_scores.end() ? nullptr : &it->second;
}

std::optional<double> IndicatorValue::scalar() const noexcept {
  if (const auto* c = std::get_if<std::uint64_t>(&value)) return static_cast<double>(*c);
  if (const auto* r = std::get_if<double>(&value)) return *r;
  if (const auto* e = std::get_if<metrics::EntropyValue>(&value)) return e->nats;
  return std::nullopt;
}

void IndicatorValue::validate() const {
  bool ok = false;
  switch (kind) {
    case ValueKind::Count: ok = std::holds_alternative<std::uint64_t>(value); break;
    case ValueKind::Ratio:
    case ValueKind::Score: ok = std::holds_alternative<double>(value); break;
    case ValueKind::Distribution: ok = std::holds_alternative<Distribution>(value); break;
    case ValueKind::Entropy: {
      const auto* e = std::get_if<metrics::EntropyValue>(&value);
      ok = e != nullptr && e->nats >= 0.0;
      break;
    }
  }
  if (!ok) {
    fail(ErrorCode::KindMismatch,
         "value of '" + indicator_id + "' does not match kind " + std::string(to_string(kind)));
  }
}

}  // namespace kiro
