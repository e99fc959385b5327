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

#include "kiro/service.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "kiro/engine.hpp"
#include "kiro/error.hpp"
#include "kiro/json_io.hpp"

namespace kiro::service {
namespace {

using json_io::Json;
using storage::DocKind;
using storage::StoreKey;

struct ApiError {
  int status;
  std::string code;
  std::string message;
};

[[noreturn]] void reject(int status, std::string code, std::string message) {
  throw ApiError{status, std::move(code), std::move(message)};
}

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> out;
  while (!path.empty()) {
    if (path.front() == '/') {
      path.remove_prefix(1);
      continue;
    }
    const auto next = path.find('/');
    out.push_back(path.substr(0, next));
    if (next == std::string_view::npos) break;
    path.remove_prefix(next);
  }
  return out;
}

std::optional<std::string> param(const ApiRequest& r, const std::string& name) {
  auto it = r.query.find(name);
  if (it == r.query.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

std::optional<long long> int_param(const ApiRequest& r, const std::string& name) {
  auto text = param(r, name);
  if (!text) return std::nullopt;
  long long v = 0;
  auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), v);
  if (ec != std::errc{} || ptr != text->data() + text->size()) {
    reject(400, "bad_request", "parameter '" + name + "' must be an integer");
  }
  return v;
}

std::optional<MonthWindow> window_param(const ApiRequest& r) {
  auto text = param(r, "window");
  if (!text) return std::nullopt;
  try {
    return MonthWindow::parse(*text);
  } catch (const Error& e) {
    reject(400, "bad_request", std::string("window: ") + e.what());
  }
}

std::optional<Month> month_param(const ApiRequest& r, const std::string& name) {
  auto text = param(r, name);
  if (!text) return std::nullopt;
  try {
    return Month::parse(*text);
  } catch (const Error& e) {
    reject(400, "bad_request", name + ": " + e.what());
  }
}

struct Page {
  std::size_t limit = kDefaultPageLimit;
  std::size_t offset = 0;
};

Page page_params(const ApiRequest& r) {
  Page p;
  if (auto limit = int_param(r, "limit")) {
    if (*limit < 1 || *limit > static_cast<long long>(kMaxPageLimit)) {
      reject(422, "invalid_parameter", "limit must be in [1, " + std::to_string(kMaxPageLimit) + "]");
    }
    p.limit = static_cast<std::size_t>(*limit);
  }
  if (auto offset = int_param(r, "offset")) {
    if (*offset < 0) reject(422, "invalid_parameter", "offset must be >= 0");
    p.offset = static_cast<std::size_t>(*offset);
  }
  return p;
}

Json paginate(const Json& items, const Page& page) {
  Json slice = Json::array();
  for (std::size_t i = page.offset; i < items.size() && i < page.offset + page.limit; ++i) slice.push_back(items[i]);
  return Json{{"items", std::move(slice)}, {"total", items.size()}, {"limit", page.limit}, {"offset", page.offset}};
}

/// Highest method_version per (subject, window) among keys of one kind.
std::map<std::pair<std::string, MonthWindow>, StoreKey> latest_versions(const storage::DocumentReader& store,
                                                                        DocKind kind) {
  std::map<std::pair<std::string, MonthWindow>, StoreKey> out;
  for (const auto& key : store.list(kind)) {
    auto [it, inserted] = out.emplace(std::pair(key.subject, key.window), key);
    if (!inserted && it->second.method_version < key.method_version) it->second = key;
  }
  return out;
}

std::optional<StoreKey> pick(const storage::DocumentReader& store, DocKind kind, const std::string& subject,
                             const std::optional<MonthWindow>& window) {
  std::optional<StoreKey> best;
  for (const auto& [sw, key] : latest_versions(store, kind)) {
    if (sw.first != subject) continue;
    if (window && sw.second != *window) continue;
    if (!best || best->window < key.window) best = key;
  }
  return best;
}

std::optional<MonthWindow> latest_window(const storage::DocumentReader& store, DocKind kind) {
  std::optional<MonthWindow> best;
  for (const auto& key : store.list(kind)) {
    if (!best || *best < key.window) best = key.window;
  }
  return best;
}

class Handler {
 public:
  Handler(const storage::DocumentReader& store, const IndicatorRegistry& registry, const ServiceConfig& config)
      : store_(store), registry_(registry), config_(config) {}

  Json route(const ApiRequest& r) const {
    const auto parts = split_path(r.path);
    if (parts.size() < 3 || parts[0] != "api" || parts[1] != "v1") reject(404, "not_found", "no such endpoint");
    const auto n = parts.size();
    if (n == 3 && parts[2] == "health") return Json{{"status", "ok"}, {"api_version", std::string(kApiVersion)}};
    if (n == 3 && parts[2] == "taxonomy") return json_io::taxonomy_json();
    if (n == 3 && parts[2] == "indicators") return json_io::registry_json(registry_);
    if (n == 3 && parts[2] == "wikis") return wikis(r);
    if (n == 5 && parts[2] == "wikis" && parts[4] == "indicators") return indicators(std::string(parts[3]), r);
    if (n == 6 && parts[2] == "wikis" && parts[4] == "series") {
      return series(std::string(parts[3]), std::string(parts[5]), r);
    }
    if (n == 3 && parts[2] == "matrix") return matrix(r);
    if (n == 4 && parts[2] == "rankings") return rankings(std::string(parts[3]), r);
    if (n == 3 && parts[2] == "scatter") return scatter(r);
    reject(404, "not_found", "no such endpoint");
  }

 private:
  std::set<std::string> known_wikis() const {
    std::set<std::string> out;
    for (auto kind : {DocKind::Snapshot, DocKind::Indicators}) {
      for (const auto& key : store_.list(kind)) out.insert(key.subject);
    }
    return out;
  }

  void require_wiki(const std::string& slug) const {
    if (!known_wikis().contains(slug)) reject(404, "unknown_wiki", "no data for wiki '" + slug + "'");
  }

  Json wikis(const ApiRequest& r) const {
    const Page page = page_params(r);
    std::map<std::string, std::set<MonthWindow>> windows;
    for (const auto& slug : known_wikis()) windows[slug];
    for (const auto& key : store_.list(DocKind::Snapshot)) windows[key.subject].insert(key.window);
    Json items = Json::array();
    for (const auto& [slug, ws] : windows) {
      Json labels = Json::array();
      for (const auto& w : ws) labels.push_back(w.label());
      items.push_back(Json{{"wiki", slug}, {"windows", std::move(labels)}});
    }
    return paginate(items, page);
  }

  Json indicators(const std::string& slug, const ApiRequest& r) const {
    const auto window = window_param(r);
    require_wiki(slug);
    auto key = pick(store_, DocKind::Indicators, slug, window);
    if (!key) reject(404, "not_found", "no indicators stored for '" + slug + "'" + (window ? " in " + window->label() : ""));
    return *store_.get(*key);
  }

  Json series(const std::string& slug, const std::string& indicator_id, const ApiRequest& r) const {
    const auto from = month_param(r, "from");
    const auto to = month_param(r, "to");
    if (from && to && *to < *from) reject(422, "invalid_parameter", "'to' precedes 'from'");
    require_wiki(slug);
    if (!registry_.find(indicator_id)) reject(404, "unknown_indicator", "unknown indicator '" + indicator_id + "'");
    Json points = Json::array();
    for (const auto& p : store_.series(slug, indicator_id, from, to)) {
      points.push_back(Json{{"window", p.window.label()}, {"value", p.value}});
    }
    return Json{{"wiki", slug},
                {"indicator_id", indicator_id},
                {"from", from ? Json(from->to_string()) : Json(nullptr)},
                {"to", to ? Json(to->to_string()) : Json(nullptr)},
                {"points", std::move(points)}};
  }

  Json matrix(const ApiRequest& r) const {
    const auto window = window_param(r);
    auto key = pick(store_, DocKind::Matrix, std::string(storage::kAllWikisCohort), window);
    if (!key) reject(404, "not_found", "no risk matrix stored" + (window ? " for " + window->label() : std::string()));
    return *store_.get(*key);
  }

  Json rankings(const std::string& indicator_id, const ApiRequest& r) const {
    const auto* def = registry_.find(indicator_id);
    if (!def) reject(404, "unknown_indicator", "unknown indicator '" + indicator_id + "'");
    if (def->value_kind == ValueKind::Distribution) {
      reject(422, "invalid_parameter", "distribution indicator '" + indicator_id + "' has no ranking");
    }
    const Page page = page_params(r);
    auto window = window_param(r);
    if (!window) window = latest_window(store_, DocKind::Indicators);
    if (!window) reject(404, "not_found", "no indicators stored");

    std::vector<IndicatorValue> values;
    for (const auto& [sw, key] : latest_versions(store_, DocKind::Indicators)) {
      if (sw.second != *window) continue;
      for (auto& v : json_io::values_from_document(*store_.get(key))) {
        if (v.indicator_id == indicator_id) values.push_back(std::move(v));
      }
    }
    if (values.empty()) reject(404, "not_found", "no values of '" + indicator_id + "' in " + window->label());
    Json doc = engine::rankings_json(*def, *window, engine::rank_wikis(*def, values));
    Json paged = paginate(doc["items"], page);
    paged["indicator_id"] = doc["indicator_id"];
    paged["window"] = doc["window"];
    paged["risk_polarity"] = doc["risk_polarity"];
    return paged;
  }

  Json scatter(const ApiRequest& r) const {
    std::uint64_t min_articles = config_.default_min_articles;
    if (auto m = int_param(r, "min_articles")) {
      if (*m <= 0) reject(422, "invalid_parameter", "min_articles must be positive");
      min_articles = static_cast<std::uint64_t>(*m);
    }
    auto window = window_param(r);
    if (!window) window = latest_window(store_, DocKind::Snapshot);
    if (!window) reject(409, "insufficient_data", "no snapshots stored");

    if (auto key = pick(store_, DocKind::Scatter, std::string(storage::kAllWikisCohort), window)) {
      auto doc = store_.get(*key);
      if (doc && (*doc)["parameters"].value("min_articles", std::uint64_t{0}) == min_articles) return *doc;
    }
    std::vector<WikiSnapshot> snapshots;
    for (const auto& [sw, key] : latest_versions(store_, DocKind::Snapshot)) {
      if (sw.second == *window) snapshots.push_back(json_io::snapshot_from_json(*store_.get(key)));
    }
    try {
      return engine::to_json(engine::entropy_scatter(snapshots, min_articles));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InsufficientData) reject(409, "insufficient_data", e.what());
      if (e.code() == ErrorCode::DegenerateFit) reject(409, "degenerate_fit", e.what());
      throw;
    }
  }

  const storage::DocumentReader& store_;
  const IndicatorRegistry& registry_;
  const ServiceConfig& config_;
};

}  // namespace

ApiRouter::ApiRouter(const storage::DocumentReader& store, const IndicatorRegistry& registry, ServiceConfig config)
    : store_(store), registry_(registry), config_(std::move(config)) {}

ApiResponse ApiRouter::handle(const ApiRequest& request) const {
  ApiResponse response;
  response.headers = {{"Content-Type", "application/json"},
                      {"X-API-Version", std::string(kApiVersion)},
                      {"Access-Control-Allow-Origin", config_.cors_origin},
                      {"Access-Control-Allow-Methods", "GET, OPTIONS"},
                      {"Vary", "Origin"}};
  auto error_body = [&](int status, const std::string& code, const std::string& message) {
    response.status = status;
    response.body = json_io::canonical_dump(Json{{"code", code}, {"message", message}});
  };
  if (request.method == "OPTIONS") {
    response.status = 204;
    return response;
  }
  if (request.method != "GET" && request.method != "HEAD") {
    error_body(405, "method_not_allowed", "the API is read-only");
    return response;
  }
  try {
    response.body = json_io::canonical_dump(Handler(store_, registry_, config_).route(request));
    response.status = 200;
  } catch (const ApiError& e) {
    error_body(e.status, e.code, e.message);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IntegrityError) {
      error_body(500, "integrity_error", e.what());
    } else {
      error_body(500, "internal", e.what());
    }
  } catch (const std::exception& e) {
    error_body(500, "internal", e.what());
  }
  return response;
}

// ---------------------------------------------------------------------------

struct Server::Impl {
  ApiRouter router;
  httplib::Server http;
  std::thread worker;
  std::mutex mutex;
  std::condition_variable stopped_cv;
  bool stopped = false;

  Impl(const storage::DocumentReader& store, const IndicatorRegistry& registry, ServiceConfig config)
      : router(store, registry, std::move(config)) {}
};

Server::Server(const storage::DocumentReader& store, const IndicatorRegistry& registry, ServiceConfig config)
    : impl_(std::make_unique<Impl>(store, registry, config)) {
  auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest request{req.method, req.path, {}};
    for (const auto& [k, v] : req.params) request.query.emplace(k, v);
    const ApiResponse out = impl_->router.handle(request);
    res.status = out.status;
    for (const auto& [k, v] : out.headers) {
      if (k != "Content-Type") res.set_header(k, v);
    }
    if (out.status != 204) res.set_content(out.body, "application/json");
  };
  impl_->http.Get(".*", dispatch);
  impl_->http.Post(".*", dispatch);
  impl_->http.Put(".*", dispatch);
  impl_->http.Delete(".*", dispatch);
  impl_->http.Patch(".*", dispatch);
  impl_->http.Options(".*", dispatch);
  // The library default enables SO_REUSEPORT, which would let a second
  // server share a port that is already taken instead of failing to bind.
  impl_->http.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });

  if (config.port == 0) {
    port_ = impl_->http.bind_to_any_port(config.host);
    if (port_ <= 0) fail(ErrorCode::BindError, "cannot bind " + config.host);
  } else {
    if (!impl_->http.bind_to_port(config.host, config.port)) {
      fail(ErrorCode::BindError, "cannot bind " + config.host + ":" + std::to_string(config.port));
    }
    port_ = config.port;
  }
  impl_->worker = std::thread([this] { impl_->http.listen_after_bind(); });
  // stop() is a no-op until the accept loop runs; wait so it cannot be missed.
  impl_->http.wait_until_ready();
}

Server::~Server() { stop(); }

void Server::stop() {
  {
    std::lock_guard lock(impl_->mutex);
    if (impl_->stopped) return;
    impl_->stopped = true;
  }
  impl_->http.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
  impl_->stopped_cv.notify_all();
}

void Server::wait() {
  std::unique_lock lock(impl_->mutex);
  impl_->stopped_cv.wait(lock, [this] { return impl_->stopped; });
}

}  // namespace kiro::service
