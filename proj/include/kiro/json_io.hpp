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

// JSON encodings of the domain types and the canonical serializer shared by
// the store, the HTTP facade and the CLI exports: object keys sorted, no
// insignificant whitespace, reals printed with 12 significant digits.

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kiro/model.hpp"

namespace kiro::json_io {

using Json = nlohmann::json;

inline constexpr int kSnapshotSchemaVersion = 1;

std::string canonical_dump(const Json& value);
/// Parse, mapping syntax errors to ParseError with `context` in the message.
Json parse(std::string_view text, std::string_view context);

std::string format_real(double v);

Json to_json(const MonthWindow& w);
MonthWindow window_from_json(const Json& j);

Json to_json(const CountryDistribution& d);
CountryDistribution distribution_from_json(const Json& j);

/// Snapshot document. `include_origin` adds the fixture_origin flag used by
/// stored documents; the bundled fixture files carry it too.
Json to_json(const WikiSnapshot& s, bool include_origin = true);
/// Strict decoding: SchemaVersionMismatch on a version other than 1,
/// ParseError on missing or ill-typed fields.
WikiSnapshot snapshot_from_json(const Json& j);

Json to_json(const metrics::EntropyValue& e);
Json to_json(const IndicatorValue& v);
IndicatorValue indicator_value_from_json(const Json& j);

Json to_json(const CategoryRiskScore& s);
CategoryRiskScore category_score_from_json(const Json& j);

Json to_json(const IndicatorDefinition& d);
IndicatorDefinition indicator_definition_from_json(const Json& j);

Json taxonomy_json();
Json registry_json(const IndicatorRegistry& registry);

/// {"wiki", "window", "values": [...]}
Json indicators_document(const WikiId& wiki, const MonthWindow& window,
                         const std::vector<IndicatorValue>& values);
std::vector<IndicatorValue> values_from_document(const Json& doc);

}  // namespace kiro::json_io
