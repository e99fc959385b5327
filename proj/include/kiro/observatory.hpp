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

// The operator workflows behind the CLI and the C API: ingest snapshots into
// the store, compute indicator/matrix/scatter documents from stored
// snapshots, write the Fig. 2 data files, export canonical documents, serve.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kiro/config.hpp"
#include "kiro/engine.hpp"
#include "kiro/error.hpp"
#include "kiro/storage.hpp"

namespace kiro {

/// Method version of the documents produced by compute().
inline constexpr int kComputeMethodVersion = 1;

enum class IngestMode {
  Live,      // real HTTP against the Wikimedia APIs
  Replay,    // a recorded payload corpus, virtual clock
  Fixtures,  // checked-in snapshot documents, no fetching at all
};

struct IngestEntry {
  WikiId wiki;
  bool ok = false;
  bool created = false;  // false when an identical snapshot was already stored
  std::optional<ErrorCode> error;
  std::string message;
  std::vector<std::string> warnings;
  std::size_t requests = 0;
  std::size_t retries = 0;
};

struct IngestReport {
  MonthWindow window;
  std::vector<IngestEntry> entries;
  bool ok() const noexcept;
  std::size_t stored() const noexcept;
};

struct ComputeReport {
  MonthWindow window;
  std::size_t snapshots = 0;
  std::size_t documents_written = 0;
  bool scatter_stored = false;
  std::string scatter_note;  // why the scatter was not stored, if it was not
};

class Observatory {
 public:
  /// Opens (creating if needed) the store at config.store_root.
  explicit Observatory(config::Config config);

  const config::Config& config() const noexcept { return config_; }
  const IndicatorRegistry& registry() const noexcept { return registry_; }
  storage::FileStore& store() noexcept { return *store_; }

  /// `source` is the fixture or corpus directory (ignored for Live). An
  /// empty wiki list means the configured cohort, or in Fixtures mode every
  /// fixture of the window when the cohort is empty too.
  IngestReport ingest(std::vector<WikiId> wikis, const MonthWindow& window, IngestMode mode,
                      const std::filesystem::path& source = {});

  /// NoData when the window has no stored snapshots.
  ComputeReport compute(const MonthWindow& window);

  /// Scatter over the stored snapshots of `window` (InsufficientData, NoData).
  engine::ScatterResult scatter(const MonthWindow& window, std::optional<std::uint64_t> min_articles = std::nullopt);

  /// Writes scatter.csv and fit.json into out_dir (IoError on failure).
  static void write_scatter_files(const engine::ScatterResult& result, const std::filesystem::path& out_dir);

  /// Copies the stored computed documents of `window` into out_dir as
  /// canonical JSON: matrix.json, scatter.json (when stored) and
  /// indicators/<slug>.json. Returns the number of files written.
  std::size_t export_window(const MonthWindow& window, const std::filesystem::path& out_dir);

  /// Latest stored snapshots of a window, sorted by slug.
  std::vector<WikiSnapshot> stored_snapshots(const MonthWindow& window) const;

 private:
  engine::EngineContext engine_context() const;

  config::Config config_;
  IndicatorRegistry registry_;
  std::unique_ptr<storage::FileStore> store_;
};

/// CSV body of scatter.csv: header "wiki,edit_entropy,view_entropy".
std::string scatter_csv(const engine::ScatterResult& result);
/// fit.json document: fit parameters plus the echoed scatter parameters.
json_io::Json fit_json(const engine::ScatterResult& result);

}  // namespace kiro
