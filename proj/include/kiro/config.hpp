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

// Operator configuration: a flat JSON object whose keys may be overridden by
// OBSERVATORY_<UPPER_KEY> environment variables and then by explicit
// overrides (command-line flags). Unknown keys are rejected everywhere so a
// typo fails fast instead of silently falling back to a default.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kiro/fetch.hpp"
#include "kiro/json_io.hpp"
#include "kiro/metrics.hpp"
#include "kiro/model.hpp"
#include "kiro/service.hpp"

namespace kiro::config {

inline constexpr std::string_view kEnvPrefix = "OBSERVATORY_";

/// Per-indicator adjustments applied on top of the default registry.
struct RegistryOverride {
  std::optional<bool> enabled;
  std::optional<RiskPolarity> risk_polarity;
  std::optional<int> method_version;
};

struct Config {
  std::filesystem::path store_root = "observatory-store";
  std::vector<std::string> wikis;  // slugs
  std::string family = "wikipedia";
  fetch::FetchPolicy fetch;
  std::map<std::string, RegistryOverride> registry_overrides;
  std::filesystem::path democracy_index_path;  // empty: geopolitics indicators absent
  std::uint64_t min_articles = 500000;
  metrics::LogBase log_base = metrics::LogBase::Natural;
  std::filesystem::path curated_data_path;
  std::filesystem::path providers_dir;
  std::filesystem::path media_dir;
  service::ServiceConfig api;

  /// The cohort list as wiki ids (bare codes take `family`).
  std::vector<WikiId> wiki_ids() const;
  /// default_registry() with the overrides applied; UnknownIndicator for an
  /// override naming no indicator.
  IndicatorRegistry registry() const;
};

/// Every accepted key, for --help output and documentation.
const std::vector<std::string>& known_keys();

/// Layers, lowest precedence first: built-in defaults, the file (when
/// `path` is non-empty), the environment, then `overrides`. Relative paths
/// in the file resolve against the file's directory. ConfigError on an
/// unknown key, a mistyped value or an invalid fetch policy.
Config load(const std::filesystem::path& path, const json_io::Json& overrides = json_io::Json::object(),
            const std::map<std::string, std::string>& environment = {});

/// Effective configuration using the same flat keys load() accepts.
json_io::Json to_json(const Config& c);

/// The OBSERVATORY_* variables of the current process.
std::map<std::string, std::string> process_environment();

}  // namespace kiro::config
