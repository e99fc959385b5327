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

// kiro: operator entry point. Links only the C interface of libkiro.
//
//   kiro [--config FILE] [--store DIR] [--verbose] <command> ...
//
// Exit codes: 0 success, 1 operational failure, 2 usage error.

#include <pthread.h>
#include <signal.h>

#include <cstdio>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "kiro/kiro.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct Globals {
  std::string config;
  std::string store;
  bool verbose = false;
};

int report_failure(const char* what, kiro_status status) {
  std::cerr << "kiro: " << what << " failed [" << kiro_status_string(status) << "]: " << kiro_last_error() << "\n";
  return kExitFailure;
}

/// Owns the observatory handle for one command.
class Session {
 public:
  Session() = default;
  ~Session() { kiro_close(obs_); }
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  kiro_status open(const Globals& g) {
    nlohmann::json overrides = nlohmann::json::object();
    if (!g.store.empty()) overrides["store_root"] = g.store;
    const std::string text = overrides.dump();
    return kiro_open(g.config.empty() ? nullptr : g.config.c_str(), text.c_str(), &obs_);
  }
  kiro_observatory* get() const { return obs_; }

 private:
  kiro_observatory* obs_ = nullptr;
};

/// Takes ownership of a library-allocated string.
std::string take(char* s) {
  std::string out = s ? s : "";
  kiro_string_free(s);
  return out;
}

int cmd_ingest(const Globals& g, const std::string& window, const std::string& wikis, const std::string& fixtures,
               const std::string& replay) {
  Session session;
  if (auto st = session.open(g); st != KIRO_OK) return report_failure("open", st);
  kiro_ingest_mode mode = KIRO_INGEST_LIVE;
  const char* source = nullptr;
  if (!fixtures.empty()) {
    mode = KIRO_INGEST_FIXTURES;
    source = fixtures.c_str();
  } else if (!replay.empty()) {
    mode = KIRO_INGEST_REPLAY;
    source = replay.c_str();
  }
  kiro_ingest_report* report = nullptr;
  if (auto st = kiro_ingest(session.get(), wikis.c_str(), window.c_str(), mode, source, &report); st != KIRO_OK) {
    return report_failure("ingest", st);
  }
  if (g.verbose) {
    char* json = nullptr;
    if (kiro_ingest_report_json(report, &json) == KIRO_OK) std::cerr << take(json) << "\n";
  }
  const size_t n = kiro_ingest_report_count(report);
  size_t stored = 0;
  std::string table;
  for (size_t i = 0; i < n; ++i) {
    const char* wiki = nullptr;
    const char* message = nullptr;
    kiro_status status = KIRO_OK;
    int created = 0;
    kiro_ingest_report_entry(report, i, &wiki, &status, &message, &created);
    if (status == KIRO_OK) {
      ++stored;
      continue;
    }
    char line[64];
    std::snprintf(line, sizeof line, "  %-16s %-24s ", wiki, kiro_status_string(status));
    table += line;
    table += message;
    table += "\n";
  }
  const bool ok = kiro_ingest_report_ok(report) != 0;
  kiro_ingest_report_free(report);
  std::cout << "ingest " << window << ": " << stored << " of " << n << " snapshots stored\n";
  if (!ok) {
    std::cerr << "failed wikis:\n  WIKI             STATUS                   MESSAGE\n" << table;
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_compute(const Globals& g, const std::string& window) {
  Session session;
  if (auto st = session.open(g); st != KIRO_OK) return report_failure("open", st);
  char* summary = nullptr;
  if (auto st = kiro_compute(session.get(), window.c_str(), &summary); st != KIRO_OK) {
    return report_failure("compute", st);
  }
  const auto j = nlohmann::json::parse(take(summary));
  std::cout << "compute " << window << ": " << j["snapshots"].get<size_t>() << " snapshots, "
            << j["documents_written"].get<size_t>() << " documents written\n";
  if (!j["scatter_stored"].get<bool>()) {
    std::cerr << "note: scatter not stored: " << j["scatter_note"].get<std::string>() << "\n";
  }
  if (g.verbose) std::cerr << j.dump() << "\n";
  return kExitOk;
}

int cmd_scatter(const Globals& g, const std::string& window, uint64_t min_articles, const std::string& out) {
  Session session;
  if (auto st = session.open(g); st != KIRO_OK) return report_failure("open", st);
  char* fit = nullptr;
  if (auto st = kiro_scatter(session.get(), window.c_str(), min_articles, out.c_str(), &fit); st != KIRO_OK) {
    return report_failure("scatter", st);
  }
  const auto j = nlohmann::json::parse(take(fit));
  std::cout << "scatter " << window << ": " << j["n_points"].get<size_t>() << " wikis, slope "
            << j["slope"].get<double>() << "; wrote " << out << "/scatter.csv and " << out << "/fit.json\n";
  return kExitOk;
}

int cmd_export(const Globals& g, const std::string& window, const std::string& out) {
  Session session;
  if (auto st = session.open(g); st != KIRO_OK) return report_failure("open", st);
  size_t files = 0;
  if (auto st = kiro_export(session.get(), window.c_str(), out.c_str(), &files); st != KIRO_OK) {
    return report_failure("export", st);
  }
  std::cout << "export " << window << ": " << files << " documents written to " << out << "\n";
  return kExitOk;
}

int cmd_serve(const Globals& g, const std::string& host, int port) {
  // Block the termination signals before any thread exists so that only the
  // dedicated waiter below receives them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGTERM);
  sigaddset(&signals, SIGINT);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Session session;
  if (auto st = session.open(g); st != KIRO_OK) return report_failure("open", st);
  kiro_server* server = nullptr;
  if (auto st = kiro_server_start(session.get(), host.empty() ? nullptr : host.c_str(), port, &server);
      st != KIRO_OK) {
    return report_failure("serve", st);
  }
  std::cout << "listening on port " << kiro_server_port(server) << std::endl;

  std::thread waiter([&] {
    int received = 0;
    sigwait(&signals, &received);
    if (g.verbose) std::cerr << "signal " << received << ": draining\n";
    kiro_server_stop(server);
  });
  kiro_server_wait(server);
  waiter.join();
  kiro_server_free(server);
  std::cout << "stopped" << std::endl;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge integrity risk observatory for Wikipedia editions", "kiro"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kiro_version());

  Globals g;
  app.add_option("--config", g.config, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--store", g.store, "Store root directory (overrides store_root)");
  app.add_flag("-v,--verbose", g.verbose, "Print detailed reports to stderr");

  std::string window;
  std::string wikis;
  std::string fixtures;
  std::string replay;
  std::string out = ".";
  uint64_t min_articles = 0;
  std::string host;
  int port = -1;

  auto* ingest = app.add_subcommand("ingest", "Fetch one snapshot per wiki and store it");
  ingest->add_option("--window", window, "Month or range, e.g. 2021-04 or 2021-01_2021-04")->required();
  ingest->add_option("--wikis", wikis, "Comma-separated wiki codes (default: configured cohort)");
  auto* fixtures_opt = ingest->add_option("--fixtures", fixtures, "Load snapshot fixtures; no network access")
                           ->check(CLI::ExistingDirectory);
  ingest->add_option("--replay", replay, "Replay a recorded payload corpus; no network access")
      ->check(CLI::ExistingDirectory)
      ->excludes(fixtures_opt);

  auto* compute = app.add_subcommand("compute", "Compute indicators, the risk matrix and the scatter");
  compute->add_option("--window", window, "Window label")->required();

  auto* scatter = app.add_subcommand("scatter", "Write the edit/view entropy scatter as scatter.csv and fit.json");
  scatter->add_option("--window", window, "Window label")->required();
  scatter->add_option("--min-articles", min_articles, "Article threshold (default: configured min_articles)")
      ->check(CLI::PositiveNumber);
  scatter->add_option("--out", out, "Output directory")->capture_default_str();

  auto* serve = app.add_subcommand("serve", "Serve the read-only HTTP API until SIGTERM/SIGINT");
  serve->add_option("--host", host, "Bind address (default: configured api_host)");
  serve->add_option("--port", port, "Port, 0 for any free port (default: configured api_port)")
      ->check(CLI::Range(0, 65535));

  auto* exp = app.add_subcommand("export", "Write the stored computed documents of a window as canonical JSON");
  exp->add_option("--window", window, "Window label")->required();
  exp->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (*ingest) return cmd_ingest(g, window, wikis, fixtures, replay);
  if (*compute) return cmd_compute(g, window);
  if (*scatter) return cmd_scatter(g, window, min_articles, out);
  if (*serve) return cmd_serve(g, host, port);
  if (*exp) return cmd_export(g, window, out);
  return kExitUsage;
}
