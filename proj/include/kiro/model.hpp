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

// Shared domain types: the risk taxonomy, the indicator registry schema and
// the raw/computed records that flow between ingestion, the engine, storage
// and the HTTP facade. Values are immutable once built; no I/O happens here.

#include <array>
#include <chrono>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kiro/metrics.hpp"

namespace kiro {

using Timestamp = std::chrono::sys_seconds;

std::string format_timestamp(Timestamp t);
Timestamp parse_timestamp(std::string_view text);  // "YYYY-MM-DDTHH:MM:SSZ"

// ---------------------------------------------------------------------------
// Taxonomy

enum class RiskCategory : std::uint8_t {
  CommunityCapacity,
  CommunityGovernance,
  CommunityDemographics,
  ContentVerifiability,
  ContentQuality,
  ContentControversiality,
  Media,
  Geopolitics,
};

inline constexpr std::size_t kCategoryCount = 8;

enum class RiskOrigin : std::uint8_t { Internal, External };
enum class RiskSubgroup : std::uint8_t { Community, Content, None };

constexpr RiskOrigin origin_of(RiskCategory c) noexcept {
  return c == RiskCategory::Media || c == RiskCategory::Geopolitics ? RiskOrigin::External
                                                                    : RiskOrigin::Internal;
}

constexpr RiskSubgroup subgroup_of(RiskCategory c) noexcept {
  switch (c) {
    case RiskCategory::CommunityCapacity:
    case RiskCategory::CommunityGovernance:
    case RiskCategory::CommunityDemographics:
      return RiskSubgroup::Community;
    case RiskCategory::ContentVerifiability:
    case RiskCategory::ContentQuality:
    case RiskCategory::ContentControversiality:
      return RiskSubgroup::Content;
    case RiskCategory::Media:
    case RiskCategory::Geopolitics:
      return RiskSubgroup::None;
  }
  return RiskSubgroup::None;
}

struct CategoryInfo {
  RiskCategory id;
  RiskOrigin origin;
  RiskSubgroup subgroup;
  std::string_view key;           // snake_case wire name
  std::string_view display_name;
};

/// The eight leaves, ordered Internal-Community, Internal-Content, External.
std::span<const CategoryInfo, kCategoryCount> taxonomy() noexcept;
const CategoryInfo& lookup(RiskCategory c) noexcept;
constexpr std::size_t index_of(RiskCategory c) noexcept { return static_cast<std::size_t>(c); }

std::string_view to_string(RiskCategory c) noexcept;
std::string_view to_string(RiskOrigin o) noexcept;
std::string_view to_string(RiskSubgroup s) noexcept;
std::optional<RiskCategory> parse_category(std::string_view key) noexcept;

// ---------------------------------------------------------------------------
// Indicator registry

enum class ValueKind : std::uint8_t { Count, Ratio, Distribution, Entropy, Score };
enum class RiskPolarity : std::uint8_t { HigherIsRiskier, LowerIsRiskier };
enum class SourceKind : std::uint8_t {
  SiteInfo,
  UserGroups,
  AbuseFilters,
  Blocks,
  PageviewsByCountry,
  EditorsByCountry,
  ExternalProvider,
  MediaReferrals,
};

std::string_view to_string(ValueKind k) noexcept;
std::string_view to_string(RiskPolarity p) noexcept;
std::string_view to_string(SourceKind s) noexcept;
std::optional<ValueKind> parse_value_kind(std::string_view s) noexcept;
std::optional<RiskPolarity> parse_polarity(std::string_view s) noexcept;
std::optional<SourceKind> parse_source_kind(std::string_view s) noexcept;

/// Sources able to yield a categorical distribution.
bool yields_distribution(SourceKind s) noexcept;

struct IndicatorDefinition {
  std::string id;
  std::string display_name;
  RiskCategory category = RiskCategory::CommunityCapacity;
  ValueKind value_kind = ValueKind::Count;
  RiskPolarity risk_polarity = RiskPolarity::HigherIsRiskier;
  std::set<SourceKind> required_sources;
  int method_version = 1;

  bool stub_backed() const noexcept { return required_sources.contains(SourceKind::ExternalProvider); }

  friend bool operator==(const IndicatorDefinition&, const IndicatorDefinition&) = default;
};

class IndicatorRegistry {
 public:
  IndicatorRegistry() = default;
  /// Throws InvalidArgument when ids repeat or a distribution-valued
  /// indicator lacks a distribution-yielding source.
  explicit IndicatorRegistry(std::vector<IndicatorDefinition> definitions);

  const std::vector<IndicatorDefinition>& definitions() const noexcept { return definitions_; }
  const IndicatorDefinition* find(std::string_view id) const noexcept;
  const IndicatorDefinition& at(std::string_view id) const;  // UnknownIndicator
  std::vector<const IndicatorDefinition*> in_category(RiskCategory c) const;
  std::size_t size() const noexcept { return definitions_.size(); }

 private:
  std::vector<IndicatorDefinition> definitions_;
};

const IndicatorRegistry& default_registry();

// ---------------------------------------------------------------------------
// Time windows

struct Month {
  int year = 1970;
  int month = 1;  // 1..12

  static Month parse(std::string_view text);  // "YYYY-MM"; ParseError otherwise
  std::string to_string() const;
  Month next() const noexcept;
  int ordinal() const noexcept { return year * 12 + (month - 1); }

  friend auto operator<=>(const Month&, const Month&) = default;
};

/// Half-open month range [start, end).
struct MonthWindow {
  Month start;
  Month end;

  static MonthWindow single(Month m) noexcept { return {m, m.next()}; }
  /// "YYYY-MM" for one month, "YYYY-MM_YYYY-MM" (end exclusive) otherwise.
  static MonthWindow parse(std::string_view label);
  std::string label() const;
  std::vector<Month> months() const;
  bool contains(Month m) const noexcept { return start <= m && m < end; }

  friend auto operator<=>(const MonthWindow&, const MonthWindow&) = default;
};

// ---------------------------------------------------------------------------
// Raw facts

struct WikiId {
  std::string code;
  std::string family = "wikipedia";

  /// Directory/API identity: the bare code for Wikipedia, code.family otherwise.
  std::string slug() const;
  static WikiId from_slug(std::string_view slug);

  friend auto operator<=>(const WikiId&, const WikiId&) = default;
};

enum class CountrySubject : std::uint8_t { Edits, Views, ActiveEditors };
std::string_view to_string(CountrySubject s) noexcept;
std::optional<CountrySubject> parse_subject(std::string_view s) noexcept;

bool is_country_code(std::string_view code) noexcept;

struct CountryDistribution {
  CountrySubject subject = CountrySubject::Views;
  MonthWindow window;
  std::map<std::string, double> entries;

  /// Throws InvalidArgument on a bad code, a negative magnitude, or (when
  /// require_mass) a distribution with no positive entry.
  void validate(bool require_mass = true) const;
  double total() const noexcept;

  friend bool operator==(const CountryDistribution&, const CountryDistribution&) = default;
};

struct SiteStats {
  std::uint64_t articles = 0;
  std::uint64_t total_pages = 0;
  std::uint64_t edits = 0;
  std::uint64_t editors = 0;
  std::uint64_t active_editors = 0;  // upstream 30-day definition
  std::optional<std::uint64_t> stub_articles;

  void validate() const;
  friend bool operator==(const SiteStats&, const SiteStats&) = default;
};

struct GovernanceStats {
  std::optional<std::uint64_t> abusefilter_rules;
  std::optional<std::uint64_t> blocked_accounts;
  std::optional<std::uint64_t> total_accounts;
  std::optional<std::uint64_t> deletion_requests;
  std::optional<std::uint64_t> steward_requests;

  void validate() const;
  friend bool operator==(const GovernanceStats&, const GovernanceStats&) = default;
};

using ScoreTable = std::map<std::string, double>;

// Reserved group_counts keys for the union of elevated-rights groups.
inline constexpr std::string_view kElevatedAny = "elevated:any";
inline constexpr std::string_view kElevatedActive = "elevated:active";

// Reserved external_scores provider ids.
inline constexpr std::string_view kCuratedProvider = "curated";
inline constexpr std::string_view kMediaReferralsProvider = "media_referrals";

struct WikiSnapshot {
  WikiId wiki;
  MonthWindow window;
  Timestamp captured_at{};
  SiteStats site_stats;
  std::map<std::string, std::uint64_t> group_counts;
  GovernanceStats governance_stats;
  std::vector<CountryDistribution> distributions;
  std::map<std::string, ScoreTable> external_scores;
  std::vector<std::string> warnings;
  bool fixture_origin = false;

  /// "<slug>/<window>@<captured_at>"
  std::string id() const;
  void validate() const;

  /// All months of `subject` summed; nullopt when no such distribution exists.
  std::optional<std::map<std::string, double>> summed(CountrySubject subject) const;
  const ScoreTable* provider(std::string_view provider_id) const noexcept;

  friend bool operator==(const WikiSnapshot&, const WikiSnapshot&) = default;
};

// ---------------------------------------------------------------------------
// Computed outputs

struct Provenance {
  std::vector<std::string> snapshot_ids;
  int method_version = 1;
  Timestamp computed_at{};
  std::optional<metrics::LogBase> log_base;  // entropies only
  std::optional<double> coverage;            // democracy scores only

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

using Distribution = std::map<std::string, double>;
using IndicatorPayload = std::variant<std::uint64_t, double, Distribution, metrics::EntropyValue>;

struct IndicatorValue {
  std::string indicator_id;
  WikiId wiki;
  MonthWindow window;
  ValueKind kind = ValueKind::Count;
  IndicatorPayload value;
  Provenance provenance;

  /// Numeric value used for ranking; nullopt for distributions.
  std::optional<double> scalar() const noexcept;
  /// Throws KindMismatch when payload and kind disagree or an entropy is negative.
  void validate() const;

  friend bool operator==(const IndicatorValue&, const IndicatorValue&) = default;
};

struct Contribution {
  std::string indicator_id;
  double risk_percentile = 0.0;

  friend bool operator==(const Contribution&, const Contribution&) = default;
};

struct CategoryRiskScore {
  WikiId wiki;
  RiskCategory category = RiskCategory::CommunityCapacity;
  double score = 0.0;
  std::vector<Contribution> contributing;
  std::vector<std::string> cohort;  // wiki slugs
  double coverage = 0.0;            // contributing / indicators defined for the category

  friend bool operator==(const CategoryRiskScore&, const CategoryRiskScore&) = default;
};

}  // namespace kiro
