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

#include "kiro/observatory.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>

#include "kiro/fetch.hpp"
#include "kiro/ingestion.hpp"
#include "kiro/json_io.hpp"

namespace kiro {
namespace {

using json_io::Json;
using storage::DocKind;
using storage::StoreKey;

/// Replayed snapshots are stamped with midnight UTC on the first day after
/// the window, the earliest moment a live capture of it could happen.
Timestamp replay_capture_time(const MonthWindow& window) {
  using namespace std::chrono;
  const sys_days day = year{window.end.year} / month{static_cast<unsigned>(window.end.month)} / 1;
  return Timestamp{day};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

std::optional<StoreKey> latest_key(const storage::DocumentReader& store, DocKind kind, const std::string& subject,
                                   const MonthWindow& window) {
  std::optional<StoreKey> best;
  for (const auto& key : store.list(kind)) {
    if (key.subject != subject || key.window != window) continue;
    if (!best || best->method_version < key.method_version) best = key;
  }
  return best;
}

}  // namespace

bool IngestReport::ok() const noexcept {
  return std::all_of(entries.begin(), entries.end(), [](const IngestEntry& e) { return e.ok; });
}

std::size_t IngestReport::stored() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const IngestEntry& e) { return e.ok; }));
}

Observatory::Observatory(config::Config config)
    : config_(std::move(config)),
      registry_(config_.registry()),
      store_(std::make_unique<storage::FileStore>(config_.store_root, true)) {}

engine::EngineContext Observatory::engine_context() const {
  engine::EngineContext ctx;
  if (!config_.democracy_index_path.empty()) {
    ctx.democracy_index = engine::load_democracy_index(config_.democracy_index_path.string());
  }
  ctx.log_base = config_.log_base;
  return ctx;
}

IngestReport Observatory::ingest(std::vector<WikiId> wikis, const MonthWindow& window, IngestMode mode,
                                 const std::filesystem::path& source) {
  if (wikis.empty()) wikis = config_.wiki_ids();
  if (wikis.empty() && mode == IngestMode::Fixtures) {
    const std::string suffix = "." + window.label() + ".snapshot.json";
    std::error_code ec;
    for (const auto& e : std::filesystem::directory_iterator(source, ec)) {
      const std::string name = e.path().filename().string();
      if (name.size() <= suffix.size() || !name.ends_with(suffix)) continue;
      const std::string stem = name.substr(0, name.size() - suffix.size());
      const auto dot = stem.find('.');
      if (dot == std::string::npos) continue;
      wikis.push_back(WikiId{stem.substr(0, dot), stem.substr(dot + 1)});
    }
    if (ec) fail(ErrorCode::FileNotFound, "cannot read fixture directory " + source.string());
    std::sort(wikis.begin(), wikis.end());
  }
  if (wikis.empty()) fail(ErrorCode::InvalidArgument, "no wikis to ingest: pass --wikis or configure a cohort");
  if (mode != IngestMode::Live && !std::filesystem::is_directory(source)) {
    fail(ErrorCode::FileNotFound, "source directory not found: " + source.string());
  }

  IngestReport report{window, {}};
  auto store_snapshot = [&](IngestEntry& entry, WikiSnapshot snapshot) {
    entry.warnings = snapshot.warnings;
    const StoreKey key{DocKind::Snapshot, snapshot.wiki.slug(), window, 1};
    try {
      entry.created = store_->put(key, json_io::to_json(snapshot)).created;
      entry.ok = true;
    } catch (const Error& e) {
      entry.error = e.code();
      entry.message = e.what();
    }
  };

  if (mode == IngestMode::Fixtures) {
    for (const auto& wiki : wikis) {
      IngestEntry entry;
      entry.wiki = wiki;
      try {
        const auto path = source / ingest::fixture_file_name(wiki, window);
        if (!std::filesystem::exists(path)) {
          fail(ErrorCode::UnknownWiki, "no fixture snapshot for wiki '" + wiki.slug() + "' in " + window.label());
        }
        WikiSnapshot snapshot = ingest::load_fixture_snapshot(path);
        if (snapshot.wiki != wiki || snapshot.window != window) {
          fail(ErrorCode::InvalidArgument, path.string() + " does not describe " + wiki.slug() + " " + window.label());
        }
        store_snapshot(entry, std::move(snapshot));
      } catch (const Error& e) {
        entry.error = e.code();
        entry.message = e.what();
      }
      report.entries.push_back(std::move(entry));
    }
    return report;
  }

  ingest::IngestSources sources;
  if (!config_.curated_data_path.empty()) sources.curated = ingest::load_curated(config_.curated_data_path);
  sources.providers_dir = config_.providers_dir;
  sources.media_dir = config_.media_dir;

  std::unique_ptr<fetch::Transport> transport;
  std::unique_ptr<fetch::Clock> clock;
  if (mode == IngestMode::Replay) {
    transport = std::make_unique<fetch::ReplayTransport>(source);
    clock = std::make_unique<fetch::ManualClock>(replay_capture_time(window));
  } else {
    transport = std::make_unique<fetch::HttpTransport>();
    clock = std::make_unique<fetch::SystemClock>();
  }
  ingest::Ingestor ingestor(*transport, *clock, config_.fetch, {}, std::move(sources));
  for (auto& outcome : ingestor.snapshot_many(wikis, window)) {
    IngestEntry entry;
    entry.wiki = outcome.wiki;
    if (outcome.report) {
      entry.requests = outcome.report->requests;
      entry.retries = outcome.report->retries;
      WikiSnapshot snapshot = std::move(outcome.report->snapshot);
      if (mode == IngestMode::Replay) snapshot.captured_at = replay_capture_time(window);
      store_snapshot(entry, std::move(snapshot));
    } else {
      entry.error = outcome.error;
      entry.message = outcome.message;
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

std::vector<WikiSnapshot> Observatory::stored_snapshots(const MonthWindow& window) const {
  std::map<std::string, StoreKey> latest;
  for (const auto& key : store_->list(DocKind::Snapshot)) {
    if (key.window != window) continue;
    auto [it, inserted] = latest.emplace(key.subject, key);
    if (!inserted && it->second.method_version < key.method_version) it->second = key;
  }
  std::vector<WikiSnapshot> out;
  for (const auto& [slug, key] : latest) {
    auto doc = store_->get(key);
    if (doc) out.push_back(json_io::snapshot_from_json(*doc));
  }
  return out;
}

ComputeReport Observatory::compute(const MonthWindow& window) {
  const auto snapshots = stored_snapshots(window);
  if (snapshots.empty()) fail(ErrorCode::NoData, "no snapshots stored for " + window.label());

  ComputeReport report;
  report.window = window;
  report.snapshots = snapshots.size();
  const auto before = store_->write_count();
  const auto matrix = engine::build_risk_matrix(snapshots, registry_, engine_context());
  for (std::size_t i = 0; i < matrix.wikis.size(); ++i) {
    store_->put(StoreKey{DocKind::Indicators, matrix.wikis[i].slug(), window, kComputeMethodVersion},
                json_io::indicators_document(matrix.wikis[i], window, matrix.values[i]));
  }
  const std::string cohort(storage::kAllWikisCohort);
  store_->put(StoreKey{DocKind::Matrix, cohort, window, kComputeMethodVersion}, engine::to_json(matrix));
  try {
    const auto scatter = engine::entropy_scatter(snapshots, config_.min_articles);
    store_->put(StoreKey{DocKind::Scatter, cohort, window, kComputeMethodVersion}, engine::to_json(scatter));
    report.scatter_stored = true;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InsufficientData && e.code() != ErrorCode::DegenerateFit) throw;
    report.scatter_note = e.what();
  }
  report.documents_written = store_->write_count() - before;
  return report;
}

engine::ScatterResult Observatory::scatter(const MonthWindow& window, std::optional<std::uint64_t> min_articles) {
  const auto snapshots = stored_snapshots(window);
  if (snapshots.empty()) fail(ErrorCode::NoData, "no snapshots stored for " + window.label());
  const std::uint64_t threshold = min_articles.value_or(config_.min_articles);
  if (threshold == 0) fail(ErrorCode::InvalidArgument, "min_articles must be positive");
  return engine::entropy_scatter(snapshots, threshold);
}

std::string scatter_csv(const engine::ScatterResult& result) {
  std::string out = "wiki,edit_entropy,view_entropy\n";
  for (const auto& p : result.points) {
    out += p.wiki.slug() + "," + json_io::format_real(p.edit_entropy) + "," + json_io::format_real(p.view_entropy) +
           "\n";
  }
  return out;
}

Json fit_json(const engine::ScatterResult& result) {
  return Json{{"slope", result.fit.slope},
              {"intercept", result.fit.intercept},
              {"r_squared", result.fit.r_squared},
              {"n_points", result.fit.n_points},
              {"parameters",
               {{"min_articles", result.min_articles},
                {"window", result.window ? Json(result.window->label()) : Json(nullptr)},
                {"log_base", "e"}}}};
}

void Observatory::write_scatter_files(const engine::ScatterResult& result, const std::filesystem::path& out_dir) {
  write_text(out_dir / "scatter.csv", scatter_csv(result));
  write_text(out_dir / "fit.json", json_io::canonical_dump(fit_json(result)) + "\n");
}

std::size_t Observatory::export_window(const MonthWindow& window, const std::filesystem::path& out_dir) {
  const std::string cohort(storage::kAllWikisCohort);
  const auto matrix_key = latest_key(*store_, DocKind::Matrix, cohort, window);
  if (!matrix_key) fail(ErrorCode::NoData, "nothing computed for " + window.label() + "; run compute first");

  std::size_t written = 0;
  auto emit = [&](const StoreKey& key, const std::filesystem::path& rel) {
    auto doc = store_->get(key);
    if (!doc) fail(ErrorCode::NoData, "missing document " + key.canonical());
    write_text(out_dir / rel, json_io::canonical_dump(*doc) + "\n");
    ++written;
  };
  emit(*matrix_key, "matrix.json");
  if (auto key = latest_key(*store_, DocKind::Scatter, cohort, window)) emit(*key, "scatter.json");

  std::map<std::string, StoreKey> indicators;
  for (const auto& key : store_->list(DocKind::Indicators)) {
    if (key.window != window) continue;
    auto [it, inserted] = indicators.emplace(key.subject, key);
    if (!inserted && it->second.method_version < key.method_version) it->second = key;
  }
  for (const auto& [slug, key] : indicators) emit(key, std::filesystem::path("indicators") / (slug + ".json"));
  return written;
}

}  // namespace kiro
