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

#include "kiro/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "kiro/error.hpp"

extern char** environ;

namespace kiro::config {
namespace {

using json_io::Json;

enum class KeyType { String, Path, UInt, Real, StringList, Object };

struct KeySpec {
  std::string_view name;
  KeyType type;
};

constexpr KeySpec kKeys[] = {
    {"store_root", KeyType::Path},
    {"wikis", KeyType::StringList},
    {"family", KeyType::String},
    {"fetch_max_in_flight", KeyType::UInt},
    {"fetch_min_interval_ms", KeyType::UInt},
    {"fetch_max_retries", KeyType::UInt},
    {"fetch_backoff_initial_ms", KeyType::UInt},
    {"fetch_backoff_multiplier", KeyType::Real},
    {"fetch_timeout_ms", KeyType::UInt},
    {"fetch_user_agent", KeyType::String},
    {"registry_overrides", KeyType::Object},
    {"democracy_index_path", KeyType::Path},
    {"min_articles", KeyType::UInt},
    {"log_base", KeyType::String},
    {"curated_data_path", KeyType::Path},
    {"providers_dir", KeyType::Path},
    {"media_dir", KeyType::Path},
    {"api_host", KeyType::String},
    {"api_port", KeyType::UInt},
    {"api_cors_origin", KeyType::String},
};

const KeySpec* find_key(std::string_view name) {
  for (const auto& k : kKeys) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

[[noreturn]] void config_error(const std::string& message) { fail(ErrorCode::ConfigError, message); }

void check_type(const KeySpec& spec, const Json& value, std::string_view origin) {
  bool ok = false;
  switch (spec.type) {
    case KeyType::String:
    case KeyType::Path: ok = value.is_string(); break;
    case KeyType::UInt: ok = value.is_number_unsigned() || (value.is_number_integer() && value.get<long long>() >= 0); break;
    case KeyType::Real: ok = value.is_number(); break;
    case KeyType::StringList:
      ok = value.is_array() && std::all_of(value.begin(), value.end(), [](const Json& v) { return v.is_string(); });
      break;
    case KeyType::Object: ok = value.is_object(); break;
  }
  if (!ok) config_error(std::string(origin) + ": key '" + std::string(spec.name) + "' has the wrong type");
}

/// Converts an environment string into the JSON value the key expects.
Json from_env_text(const KeySpec& spec, const std::string& var, const std::string& text) {
  switch (spec.type) {
    case KeyType::String:
    case KeyType::Path: return text;
    case KeyType::UInt: {
      std::uint64_t v = 0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc{} || ptr != text.data() + text.size()) config_error(var + ": expected a non-negative integer");
      return v;
    }
    case KeyType::Real: {
      char* end = nullptr;
      const double v = std::strtod(text.c_str(), &end);
      if (text.empty() || end != text.c_str() + text.size()) config_error(var + ": expected a number");
      return v;
    }
    case KeyType::StringList: {
      Json list = Json::array();
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (!item.empty()) list.push_back(item);
      }
      return list;
    }
    case KeyType::Object:
      try {
        return json_io::parse(text, var);
      } catch (const Error& e) {
        config_error(e.what());
      }
  }
  return nullptr;
}

/// Merges `layer` into `merged`, validating names and types. Paths are
/// resolved against `base` when it is non-empty.
void apply_layer(Json& merged, const Json& layer, std::string_view origin, const std::filesystem::path& base) {
  if (!layer.is_object()) config_error(std::string(origin) + ": configuration must be a JSON object");
  for (const auto& [name, value] : layer.items()) {
    const KeySpec* spec = find_key(name);
    if (!spec) config_error(std::string(origin) + ": unknown key '" + name + "'");
    check_type(*spec, value, origin);
    if (spec->type == KeyType::Path && !base.empty() && !value.get<std::string>().empty()) {
      std::filesystem::path p = value.get<std::string>();
      merged[name] = (p.is_absolute() ? p : base / p).lexically_normal().string();
    } else {
      merged[name] = value;
    }
  }
}

RegistryOverride parse_override(const std::string& id, const Json& j) {
  if (!j.is_object()) config_error("registry_overrides." + id + " must be an object");
  RegistryOverride o;
  for (const auto& [k, v] : j.items()) {
    if (k == "enabled" && v.is_boolean()) {
      o.enabled = v.get<bool>();
    } else if (k == "risk_polarity" && v.is_string()) {
      o.risk_polarity = parse_polarity(v.get<std::string>());
      if (!o.risk_polarity) config_error("registry_overrides." + id + ": unknown polarity '" + v.get<std::string>() + "'");
    } else if (k == "method_version" && v.is_number_integer() && v.get<int>() >= 1) {
      o.method_version = v.get<int>();
    } else {
      config_error("registry_overrides." + id + ": unknown or mistyped key '" + k + "'");
    }
  }
  return o;
}

fetch::Duration ms(const Json& v) { return fetch::Duration(v.get<std::uint64_t>()); }

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& k : kKeys) out.emplace_back(k.name);
    return out;
  }();
  return keys;
}

std::map<std::string, std::string> process_environment() {
  std::map<std::string, std::string> out;
  for (char** e = environ; e && *e; ++e) {
    std::string_view entry(*e);
    if (!entry.starts_with(kEnvPrefix)) continue;
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    out.emplace(std::string(entry.substr(0, eq)), std::string(entry.substr(eq + 1)));
  }
  return out;
}

Config load(const std::filesystem::path& path, const Json& overrides,
            const std::map<std::string, std::string>& environment) {
  Json merged = Json::object();
  if (!path.empty()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) config_error("cannot read config file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    Json file;
    try {
      file = json_io::parse(buffer.str(), path.string());
    } catch (const Error& e) {
      config_error(e.what());
    }
    apply_layer(merged, file, path.string(), std::filesystem::absolute(path).parent_path());
  }

  Json env_layer = Json::object();
  for (const auto& [var, text] : environment) {
    if (!var.starts_with(kEnvPrefix)) continue;
    std::string key = var.substr(kEnvPrefix.size());
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
    const KeySpec* spec = find_key(key);
    if (!spec) config_error("environment: unknown variable " + var);
    env_layer[key] = from_env_text(*spec, var, text);
  }
  apply_layer(merged, env_layer, "environment", {});
  apply_layer(merged, overrides.is_null() ? Json::object() : overrides, "overrides", {});

  Config c;
  auto has = [&](const char* k) { return merged.contains(k); };
  if (has("store_root")) c.store_root = merged["store_root"].get<std::string>();
  if (has("wikis")) c.wikis = merged["wikis"].get<std::vector<std::string>>();
  if (has("family")) c.family = merged["family"].get<std::string>();
  if (has("fetch_max_in_flight")) c.fetch.max_in_flight = merged["fetch_max_in_flight"].get<std::size_t>();
  if (has("fetch_min_interval_ms")) c.fetch.min_request_interval = ms(merged["fetch_min_interval_ms"]);
  if (has("fetch_max_retries")) c.fetch.max_retries = merged["fetch_max_retries"].get<std::size_t>();
  if (has("fetch_backoff_initial_ms")) c.fetch.backoff_initial = ms(merged["fetch_backoff_initial_ms"]);
  if (has("fetch_backoff_multiplier")) c.fetch.backoff_multiplier = merged["fetch_backoff_multiplier"].get<double>();
  if (has("fetch_timeout_ms")) c.fetch.timeout = ms(merged["fetch_timeout_ms"]);
  if (has("fetch_user_agent")) c.fetch.user_agent = merged["fetch_user_agent"].get<std::string>();
  if (has("registry_overrides")) {
    for (const auto& [id, o] : merged["registry_overrides"].items()) c.registry_overrides[id] = parse_override(id, o);
  }
  if (has("democracy_index_path")) c.democracy_index_path = merged["democracy_index_path"].get<std::string>();
  if (has("min_articles")) c.min_articles = merged["min_articles"].get<std::uint64_t>();
  if (has("log_base")) {
    const auto base = merged["log_base"].get<std::string>();
    if (base == "e") {
      c.log_base = metrics::LogBase::Natural;
    } else if (base == "2") {
      c.log_base = metrics::LogBase::Two;
    } else {
      config_error("log_base must be \"e\" or \"2\"");
    }
  }
  if (has("curated_data_path")) c.curated_data_path = merged["curated_data_path"].get<std::string>();
  if (has("providers_dir")) c.providers_dir = merged["providers_dir"].get<std::string>();
  if (has("media_dir")) c.media_dir = merged["media_dir"].get<std::string>();
  if (has("api_host")) c.api.host = merged["api_host"].get<std::string>();
  if (has("api_port")) {
    const auto port = merged["api_port"].get<std::uint64_t>();
    if (port > 65535) config_error("api_port must be at most 65535");
    c.api.port = static_cast<int>(port);
  }
  if (has("api_cors_origin")) c.api.cors_origin = merged["api_cors_origin"].get<std::string>();
  c.api.default_min_articles = c.min_articles;

  if (c.min_articles == 0) config_error("min_articles must be positive");
  if (c.store_root.empty()) config_error("store_root must not be empty");
  try {
    c.fetch.validate();
    (void)c.wiki_ids();
  } catch (const Error& e) {
    config_error(e.what());
  }
  return c;
}

Json to_json(const Config& c) {
  Json overrides = Json::object();
  for (const auto& [id, o] : c.registry_overrides) {
    Json entry = Json::object();
    if (o.enabled) entry["enabled"] = *o.enabled;
    if (o.risk_polarity) entry["risk_polarity"] = std::string(to_string(*o.risk_polarity));
    if (o.method_version) entry["method_version"] = *o.method_version;
    overrides[id] = std::move(entry);
  }
  return Json{{"store_root", c.store_root.string()},
              {"wikis", c.wikis},
              {"family", c.family},
              {"fetch_max_in_flight", c.fetch.max_in_flight},
              {"fetch_min_interval_ms", c.fetch.min_request_interval.count()},
              {"fetch_max_retries", c.fetch.max_retries},
              {"fetch_backoff_initial_ms", c.fetch.backoff_initial.count()},
              {"fetch_backoff_multiplier", c.fetch.backoff_multiplier},
              {"fetch_timeout_ms", c.fetch.timeout.count()},
              {"fetch_user_agent", c.fetch.user_agent},
              {"registry_overrides", std::move(overrides)},
              {"democracy_index_path", c.democracy_index_path.string()},
              {"min_articles", c.min_articles},
              {"log_base", c.log_base == metrics::LogBase::Two ? "2" : "e"},
              {"curated_data_path", c.curated_data_path.string()},
              {"providers_dir", c.providers_dir.string()},
              {"media_dir", c.media_dir.string()},
              {"api_host", c.api.host},
              {"api_port", c.api.port},
              {"api_cors_origin", c.api.cors_origin}};
}

std::vector<WikiId> Config::wiki_ids() const {
  std::vector<WikiId> out;
  for (const auto& slug : wikis) {
    WikiId id = WikiId::from_slug(slug);
    if (slug.find('.') == std::string::npos) id.family = family;
    out.push_back(std::move(id));
  }
  return out;
}

IndicatorRegistry Config::registry() const {
  const auto& base = default_registry();
  for (const auto& [id, o] : registry_overrides) {
    if (!base.find(id)) fail(ErrorCode::UnknownIndicator, "registry override names unknown indicator '" + id + "'");
  }
  std::vector<IndicatorDefinition> defs;
  for (auto def : base.definitions()) {
    auto it = registry_overrides.find(def.id);
    if (it != registry_overrides.end()) {
      if (it->second.enabled == false) continue;
      if (it->second.risk_polarity) def.risk_polarity = *it->second.risk_polarity;
      if (it->second.method_version) def.method_version = *it->second.method_version;
    }
    defs.push_back(std::move(def));
  }
  return IndicatorRegistry(std::move(defs));
}

}  // namespace kiro::config
