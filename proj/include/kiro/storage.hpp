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

// Versioned document store: one canonical-JSON file per key plus a SHA-256
// sidecar, laid out as {root}/{kind}/{subject}/{window}/{method_version}.json.
// Keys are immutable; re-putting identical content is a no-op.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kiro/json_io.hpp"
#include "kiro/model.hpp"

namespace kiro::storage {

enum class DocKind : std::uint8_t { Snapshot, Indicators, Matrix, Scatter };

std::string_view to_string(DocKind k) noexcept;
std::optional<DocKind> parse_doc_kind(std::string_view s) noexcept;

/// Cohort id used for documents computed over every snapshot of a window.
inline constexpr std::string_view kAllWikisCohort = "all";

struct StoreKey {
  DocKind kind = DocKind::Snapshot;
  std::string subject;  // wiki slug, or cohort id for Matrix/Scatter
  MonthWindow window;
  int method_version = 1;

  /// "{kind}/{subject}/{window}/{method_version}"
  std::string canonical() const;
  static StoreKey parse(std::string_view canonical);
  std::filesystem::path relative_path() const;

  friend auto operator<=>(const StoreKey&, const StoreKey&) = default;
};

struct Receipt {
  StoreKey key;
  std::string sha256;
  bool created = false;  // false when an identical document already existed
};

struct SeriesPoint {
  MonthWindow window;
  json_io::Json value;
};

std::string sha256_hex(std::string_view bytes);

/// Read side of a store; the HTTP facade only ever sees this.
class DocumentReader {
 public:
  virtual ~DocumentReader() = default;
  /// nullopt when absent; IntegrityError when the stored bytes fail their checksum.
  virtual std::optional<json_io::Json> get(const StoreKey& key) const = 0;
  virtual std::vector<StoreKey> list(DocKind kind) const = 0;

  /// Stored values of one indicator for one wiki, ascending by window start,
  /// optionally bounded to windows starting in [from, to]. Missing months stay missing.
  std::vector<SeriesPoint> series(const std::string& wiki_slug, const std::string& indicator_id,
                                  std::optional<Month> from = std::nullopt,
                                  std::optional<Month> to = std::nullopt) const;
};

class DocumentStore : public DocumentReader {
 public:
  /// Conflict when the key holds different content; SchemaViolation when the
  /// document does not fit key.kind.
  virtual Receipt put(const StoreKey& key, const json_io::Json& document) = 0;
};

/// Points inside FileStore::put where a crash can be simulated.
enum class FaultPoint : std::uint8_t {
  TornDocumentWrite,    // half of the document bytes reached the temp file
  AfterDocumentTemp,    // temp document complete, nothing renamed
  AfterChecksumRename,  // sidecar committed, document not yet renamed
  AfterDocumentRename,  // both renamed, directory not yet synced
};
inline constexpr FaultPoint kAllFaultPoints[] = {FaultPoint::TornDocumentWrite, FaultPoint::AfterDocumentTemp,
                                                 FaultPoint::AfterChecksumRename, FaultPoint::AfterDocumentRename};

/// Thrown by an injected fault; deliberately not a kiro::Error.
struct SimulatedCrash {
  FaultPoint point;
};

void validate_document(const StoreKey& key, const json_io::Json& document);

class FileStore final : public DocumentStore {
 public:
  /// StoreUnavailable when `root` is missing and create is false.
  explicit FileStore(std::filesystem::path root, bool create = true);

  Receipt put(const StoreKey& key, const json_io::Json& document) override;
  std::optional<json_io::Json> get(const StoreKey& key) const override;
  std::vector<StoreKey> list(DocKind kind) const override;

  const std::filesystem::path& root() const noexcept { return root_; }
  /// Number of put calls that changed the on-disk state.
  std::size_t write_count() const noexcept { return writes_.load(); }

  /// Test hook: the next put stops at `point` by throwing SimulatedCrash.
  void inject_fault(FaultPoint point) { fault_ = point; }

 private:
  std::mutex& key_lock(const std::string& canonical);
  void maybe_crash(FaultPoint point);

  std::filesystem::path root_;
  std::atomic<std::size_t> writes_{0};
  std::optional<FaultPoint> fault_;
  std::mutex locks_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> key_locks_;
};

}  // namespace kiro::storage
