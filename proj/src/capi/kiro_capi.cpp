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

// extern "C" surface over the observatory. Exceptions never cross this
// boundary: every entry point converts them into a kiro_status and records
// the message for kiro_last_error().

#include "kiro/kiro.h"

#include <cstring>
#include <memory>
#include <sstream>
#include <string>

#include "kiro/config.hpp"
#include "kiro/error.hpp"
#include "kiro/json_io.hpp"
#include "kiro/observatory.hpp"
#include "kiro/service.hpp"

struct kiro_observatory {
  std::unique_ptr<kiro::Observatory> impl;
};

struct kiro_ingest_report {
  kiro::IngestReport report;
  std::vector<std::string> slugs;
};

struct kiro_server {
  std::unique_ptr<kiro::service::Server> impl;
};

namespace {

using kiro::json_io::Json;

thread_local std::string g_last_error;

static_assert(static_cast<int>(kiro::ErrorCode::InvalidArgument) + 1 == KIRO_E_INVALID_ARGUMENT);
static_assert(static_cast<int>(kiro::ErrorCode::UnknownWiki) + 1 == KIRO_E_UNKNOWN_WIKI);
static_assert(static_cast<int>(kiro::ErrorCode::ConfigError) + 1 == KIRO_E_CONFIG);

kiro_status to_status(kiro::ErrorCode code) noexcept {
  return static_cast<kiro_status>(static_cast<int>(code) + 1);
}

kiro_status set_error(kiro_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename Fn>
kiro_status guarded(Fn&& fn) noexcept {
  try {
    g_last_error.clear();
    fn();
    return KIRO_OK;
  } catch (const kiro::Error& e) {
    return set_error(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(KIRO_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(KIRO_E_INTERNAL, e.what());
  } catch (...) {
    return set_error(KIRO_E_INTERNAL, "unknown failure");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool condition, const char* what) {
  if (!condition) kiro::fail(kiro::ErrorCode::InvalidArgument, what);
}

kiro::MonthWindow window_arg(const char* window) {
  require(window && *window, "window is required");
  return kiro::MonthWindow::parse(window);
}

std::vector<kiro::WikiId> wikis_arg(const char* csv, const std::string& family) {
  std::vector<kiro::WikiId> out;
  if (!csv) return out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    kiro::WikiId id = kiro::WikiId::from_slug(item);
    if (item.find('.') == std::string::npos) id.family = family;
    out.push_back(std::move(id));
  }
  return out;
}

}  // namespace

extern "C" {

const char* kiro_version(void) { return "0.1.0"; }

const char* kiro_status_string(kiro_status status) {
  if (status == KIRO_OK) return "ok";
  if (status == KIRO_E_INTERNAL) return "internal";
  const int code = static_cast<int>(status) - 1;
  if (code < 0 || code > static_cast<int>(kiro::ErrorCode::ConfigError)) return "unknown";
  return kiro::to_string(static_cast<kiro::ErrorCode>(code)).data();
}

const char* kiro_last_error(void) { return g_last_error.c_str(); }

void kiro_string_free(char* s) { std::free(s); }

kiro_status kiro_open(const char* config_path, const char* overrides_json, kiro_observatory** out) {
  return guarded([&] {
    require(out != nullptr, "out is NULL");
    *out = nullptr;
    Json overrides = Json::object();
    if (overrides_json && *overrides_json) {
      try {
        overrides = kiro::json_io::parse(overrides_json, "overrides");
      } catch (const kiro::Error& e) {
        kiro::fail(kiro::ErrorCode::ConfigError, e.what());
      }
    }
    auto config = kiro::config::load(config_path ? config_path : "", overrides, kiro::config::process_environment());
    auto obs = std::make_unique<kiro_observatory>();
    obs->impl = std::make_unique<kiro::Observatory>(std::move(config));
    *out = obs.release();
  });
}

void kiro_close(kiro_observatory* obs) { delete obs; }

kiro_status kiro_config_json(const kiro_observatory* obs, char** out) {
  return guarded([&] {
    require(obs && out, "NULL argument");
    *out = dup_string(kiro::json_io::canonical_dump(kiro::config::to_json(obs->impl->config())));
  });
}

kiro_status kiro_taxonomy_json(char** out) {
  return guarded([&] {
    require(out != nullptr, "out is NULL");
    *out = dup_string(kiro::json_io::canonical_dump(kiro::json_io::taxonomy_json()));
  });
}

kiro_status kiro_registry_json(const kiro_observatory* obs, char** out) {
  return guarded([&] {
    require(obs && out, "NULL argument");
    *out = dup_string(kiro::json_io::canonical_dump(kiro::json_io::registry_json(obs->impl->registry())));
  });
}

kiro_status kiro_ingest(kiro_observatory* obs, const char* wikis_csv, const char* window, kiro_ingest_mode mode,
                        const char* source_dir, kiro_ingest_report** out) {
  return guarded([&] {
    require(obs && out, "NULL argument");
    *out = nullptr;
    kiro::IngestMode m;
    switch (mode) {
      case KIRO_INGEST_LIVE: m = kiro::IngestMode::Live; break;
      case KIRO_INGEST_REPLAY: m = kiro::IngestMode::Replay; break;
      case KIRO_INGEST_FIXTURES: m = kiro::IngestMode::Fixtures; break;
      default: kiro::fail(kiro::ErrorCode::InvalidArgument, "unknown ingest mode");
    }
    require(m == kiro::IngestMode::Live || (source_dir && *source_dir), "source directory is required");
    auto report = std::make_unique<kiro_ingest_report>();
    report->report = obs->impl->ingest(wikis_arg(wikis_csv, obs->impl->config().family), window_arg(window), m,
                                       source_dir ? source_dir : "");
    for (const auto& e : report->report.entries) report->slugs.push_back(e.wiki.slug());
    *out = report.release();
  });
}

size_t kiro_ingest_report_count(const kiro_ingest_report* report) {
  return report ? report->report.entries.size() : 0;
}

int kiro_ingest_report_ok(const kiro_ingest_report* report) { return report && report->report.ok() ? 1 : 0; }

kiro_status kiro_ingest_report_entry(const kiro_ingest_report* report, size_t index, const char** wiki,
                                     kiro_status* status, const char** message, int* created) {
  return guarded([&] {
    require(report != nullptr, "report is NULL");
    require(index < report->report.entries.size(), "index out of range");
    const auto& e = report->report.entries[index];
    if (wiki) *wiki = report->slugs[index].c_str();
    if (status) *status = e.ok ? KIRO_OK : (e.error ? to_status(*e.error) : KIRO_E_INTERNAL);
    if (message) *message = e.message.c_str();
    if (created) *created = e.created ? 1 : 0;
  });
}

kiro_status kiro_ingest_report_json(const kiro_ingest_report* report, char** out) {
  return guarded([&] {
    require(report && out, "NULL argument");
    Json entries = Json::array();
    for (const auto& e : report->report.entries) {
      entries.push_back(Json{{"wiki", e.wiki.slug()},
                             {"ok", e.ok},
                             {"created", e.created},
                             {"error", e.error ? Json(std::string(kiro::to_string(*e.error))) : Json(nullptr)},
                             {"message", e.message},
                             {"warnings", e.warnings},
                             {"requests", e.requests},
                             {"retries", e.retries}});
    }
    *out = dup_string(kiro::json_io::canonical_dump(
        Json{{"window", report->report.window.label()}, {"stored", report->report.stored()}, {"entries", entries}}));
  });
}

void kiro_ingest_report_free(kiro_ingest_report* report) { delete report; }

kiro_status kiro_compute(kiro_observatory* obs, const char* window, char** summary_json) {
  return guarded([&] {
    require(obs != nullptr, "observatory is NULL");
    const auto r = obs->impl->compute(window_arg(window));
    if (summary_json) {
      *summary_json = dup_string(kiro::json_io::canonical_dump(Json{{"window", r.window.label()},
                                                                    {"snapshots", r.snapshots},
                                                                    {"documents_written", r.documents_written},
                                                                    {"scatter_stored", r.scatter_stored},
                                                                    {"scatter_note", r.scatter_note}}));
    }
  });
}

kiro_status kiro_scatter(kiro_observatory* obs, const char* window, uint64_t min_articles, const char* out_dir,
                         char** fit_json) {
  return guarded([&] {
    require(obs != nullptr, "observatory is NULL");
    std::optional<std::uint64_t> threshold;
    if (min_articles > 0) threshold = min_articles;
    const auto result = obs->impl->scatter(window_arg(window), threshold);
    if (out_dir && *out_dir) kiro::Observatory::write_scatter_files(result, out_dir);
    if (fit_json) *fit_json = dup_string(kiro::json_io::canonical_dump(kiro::fit_json(result)));
  });
}

kiro_status kiro_export(kiro_observatory* obs, const char* window, const char* out_dir, size_t* files_written) {
  return guarded([&] {
    require(obs != nullptr, "observatory is NULL");
    require(out_dir && *out_dir, "out_dir is required");
    const auto n = obs->impl->export_window(window_arg(window), out_dir);
    if (files_written) *files_written = n;
  });
}

kiro_status kiro_server_start(kiro_observatory* obs, const char* host, int port, kiro_server** out) {
  return guarded([&] {
    require(obs && out, "NULL argument");
    *out = nullptr;
    auto cfg = obs->impl->config().api;
    if (host && *host) cfg.host = host;
    if (port >= 0) cfg.port = port;
    auto server = std::make_unique<kiro_server>();
    server->impl = std::make_unique<kiro::service::Server>(obs->impl->store(), obs->impl->registry(), cfg);
    *out = server.release();
  });
}

int kiro_server_port(const kiro_server* server) { return server ? server->impl->port() : -1; }

void kiro_server_stop(kiro_server* server) {
  if (server) server->impl->stop();
}

void kiro_server_wait(kiro_server* server) {
  if (server) server->impl->wait();
}

void kiro_server_free(kiro_server* server) { delete server; }

}  // extern "C"
