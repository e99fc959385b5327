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

// Applies the indicator registry to snapshots and turns raw values into
// cohort-relative risk: midrank percentiles oriented by polarity, per-category
// means, rankings, and the edit/view entropy scatter.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kiro/json_io.hpp"
#include "kiro/metrics.hpp"
#include "kiro/model.hpp"

namespace kiro::engine {

inline constexpr std::uint64_t kDefaultMinArticles = 500000;

struct EngineContext {
  std::map<std::string, double> democracy_index;  // ISO country -> [0,1]
  metrics::LogBase log_base = metrics::LogBase::Natural;
};

/// Loads {"scores": {"XX": 0.8, ...}} (other top-level keys are metadata).
std::map<std::string, double> load_democracy_index(const std::string& path);

/// Absent when the snapshot lacks the data the indicator needs.
/// UnknownIndicator for ids the engine has no method for; KindMismatch when
/// the computed value contradicts def.value_kind.
std::optional<IndicatorValue> compute_indicator(const IndicatorDefinition& def,
                                                const WikiSnapshot& snapshot,
                                                const EngineContext& ctx);

std::vector<IndicatorValue> compute_all(const IndicatorRegistry& registry,
                                        const WikiSnapshot& snapshot, const EngineContext& ctx);

/// percentile_rank oriented so that 1 is the riskiest end of the cohort.
double risk_percentile(const IndicatorDefinition& def, double value,
                       std::span<const double> cohort_values);

/// slug -> indicator id -> value, for one window.
using CohortValues = std::map<std::string, std::map<std::string, IndicatorValue>>;

CohortValues index_values(const std::vector<std::vector<IndicatorValue>>& per_wiki);

std::optional<CategoryRiskScore> category_score(const WikiId& wiki, RiskCategory category,
                                                const IndicatorRegistry& registry,
                                                const CohortValues& cohort);

struct RankedEntry {
  WikiId wiki;
  double value = 0.0;
  double risk_percentile = 0.0;
};

/// Riskiest first; ties by wiki slug. InvalidArgument on an empty list.
std::vector<RankedEntry> rank_wikis(const IndicatorDefinition& def,
                                    std::span<const IndicatorValue> values);

struct ScatterPoint {
  WikiId wiki;
  double edit_entropy = 0.0;  // nats
  double view_entropy = 0.0;  // nats
  std::uint64_t articles = 0;
};

struct ScatterResult {
  std::uint64_t min_articles = kDefaultMinArticles;
  std::optional<MonthWindow> window;
  std::vector<ScatterPoint> points;  // sorted by wiki slug
  metrics::LinearFit fit;
};

/// One point per wiki with more than min_articles articles and both Edits and
/// Views distributions; months are summed before the entropy is taken.
/// InsufficientData below two points; DegenerateFit when all edit entropies tie.
ScatterResult entropy_scatter(std::span<const WikiSnapshot> snapshots,
                              std::uint64_t min_articles = kDefaultMinArticles);

/// Entropy per month of one subject, for inspecting the window aggregation.
std::map<Month, metrics::EntropyValue> monthly_entropies(const WikiSnapshot& snapshot,
                                                         CountrySubject subject);

struct RiskMatrix {
  MonthWindow window;
  std::vector<WikiId> wikis;  // sorted by slug
  std::vector<std::array<std::optional<CategoryRiskScore>, kCategoryCount>> rows;
  std::vector<std::vector<IndicatorValue>> values;  // parallel to wikis
};

/// Deterministic for a given multiset of snapshots, regardless of order.
RiskMatrix build_risk_matrix(std::span<const WikiSnapshot> snapshots,
                             const IndicatorRegistry& registry, const EngineContext& ctx);

json_io::Json to_json(const RiskMatrix& m);
json_io::Json to_json(const ScatterResult& s);
json_io::Json rankings_json(const IndicatorDefinition& def, const MonthWindow& window,
                            const std::vector<RankedEntry>& ranked);

}  // namespace kiro::engine
