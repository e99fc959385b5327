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

#include "kiro/storage.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include <openssl/evp.h>

#include "kiro/error.hpp"

namespace kiro::storage {
namespace {

using json_io::Json;

constexpr std::array<std::string_view, 4> kKindNames{"snapshot", "indicators", "matrix", "scatter"};

bool valid_segment(std::string_view s) {
  return !s.empty() && s != "." && s != ".." && s.find('/') == std::string_view::npos &&
         s.find('\\') == std::string_view::npos;
}

std::optional<std::string> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_all(int fd, std::string_view bytes, const std::filesystem::path& p) {
  while (!bytes.empty()) {
    const ssize_t n = ::write(fd, bytes.data(), bytes.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(ErrorCode::IoError, "write " + p.string() + ": " + std::strerror(errno));
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

class Fd {
 public:
  Fd(const std::filesystem::path& p, int flags) : fd_(::open(p.c_str(), flags, 0644)) {
    if (fd_ < 0) fail(ErrorCode::IoError, "open " + p.string() + ": " + std::strerror(errno));
  }
  ~Fd() {
    if (fd_ >= 0) ::close(fd_);
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  int get() const noexcept { return fd_; }

 private:
  int fd_;
};

void sync_dir(const std::filesystem::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd >= 0) {
    ::fsync(fd);
    ::close(fd);
  }
}

std::filesystem::path temp_name(const std::filesystem::path& target) {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  return target.string() + ".tmp." + std::to_string(rng());
}

void rename_or_fail(const std::filesystem::path& from, const std::filesystem::path& to) {
  if (::rename(from.c_str(), to.c_str()) != 0) {
    fail(ErrorCode::IoError, "rename " + from.string() + ": " + std::strerror(errno));
  }
}

std::filesystem::path sidecar_of(const std::filesystem::path& doc) { return doc.string() + ".sha256"; }

}  // namespace

std::string_view to_string(DocKind k) noexcept { return kKindNames[static_cast<std::size_t>(k)]; }

std::optional<DocKind> parse_doc_kind(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == s) return static_cast<DocKind>(i);
  }
  return std::nullopt;
}

std::string StoreKey::canonical() const {
  return std::string(to_string(kind)) + "/" + subject + "/" + window.label() + "/" + std::to_string(method_version);
}

StoreKey StoreKey::parse(std::string_view canonical) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (pos <= canonical.size()) {
    const auto next = canonical.find('/', pos);
    parts.push_back(canonical.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  if (parts.size() != 4) fail(ErrorCode::ParseError, "store key needs 4 segments: " + std::string(canonical));
  auto kind = parse_doc_kind(parts[0]);
  if (!kind) fail(ErrorCode::ParseError, "unknown document kind '" + std::string(parts[0]) + "'");
  if (!valid_segment(parts[1])) fail(ErrorCode::ParseError, "bad store key subject");
  StoreKey key{*kind, std::string(parts[1]), MonthWindow::parse(parts[2]), 0};
  const std::string version(parts[3]);
  if (version.empty() || !std::all_of(version.begin(), version.end(), ::isdigit) || version.size() > 6) {
    fail(ErrorCode::ParseError, "bad method version '" + version + "'");
  }
  key.method_version = std::stoi(version);
  if (key.canonical() != canonical) fail(ErrorCode::ParseError, "non-canonical store key " + std::string(canonical));
  return key;
}

std::filesystem::path StoreKey::relative_path() const {
  return std::filesystem::path(std::string(to_string(kind))) / subject / window.label() /
         (std::to_string(method_version) + ".json");
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorCode::IoError, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

void validate_document(const StoreKey& key, const Json& document) {
  auto violation = [&](const std::string& why) {
    fail(ErrorCode::SchemaViolation, key.canonical() + ": " + why);
  };
  if (!valid_segment(key.subject)) violation("bad subject");
  if (key.method_version < 1) violation("method_version must be >= 1");
  if (!document.is_object()) violation("document must be an object");
  try {
    switch (key.kind) {
      case DocKind::Snapshot: {
        const auto s = json_io::snapshot_from_json(document);
        if (s.wiki.slug() != key.subject || s.window != key.window) violation("snapshot does not match key");
        break;
      }
      case DocKind::Indicators: {
        if (document.value("wiki", "") != key.subject || document.value("window", "") != key.window.label()) {
          violation("indicators document does not match key");
        }
        for (const auto& v : json_io::values_from_document(document)) {
          if (v.wiki.slug() != key.subject) violation("indicator value for another wiki");
        }
        break;
      }
      case DocKind::Matrix:
        if (document.value("window", "") != key.window.label() || !document.contains("rows") ||
            !document["rows"].is_array() || !document.contains("wikis")) {
          violation("matrix document needs window, wikis and rows");
        }
        break;
      case DocKind::Scatter:
        if (!document.contains("points") || !document["points"].is_array() || !document.contains("fit") ||
            !document.contains("parameters")) {
          violation("scatter document needs parameters, points and fit");
        }
        break;
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaViolation) throw;
    violation(e.what());
  }
}

// ---------------------------------------------------------------------------

std::vector<SeriesPoint> DocumentReader::series(const std::string& wiki_slug, const std::string& indicator_id,
                                                std::optional<Month> from, std::optional<Month> to) const {
  std::map<MonthWindow, StoreKey> latest;  // highest method_version per window
  for (const auto& key : list(DocKind::Indicators)) {
    if (key.subject != wiki_slug) continue;
    if (from && key.window.start < *from) continue;
    if (to && *to < key.window.start) continue;
    auto [it, inserted] = latest.emplace(key.window, key);
    if (!inserted && it->second.method_version < key.method_version) it->second = key;
  }
  std::vector<SeriesPoint> out;
  for (const auto& [window, key] : latest) {
    auto doc = get(key);
    if (!doc) continue;
    for (const auto& v : (*doc)["values"]) {
      if (v.value("indicator_id", "") == indicator_id) {
        out.push_back(SeriesPoint{window, v["value"]});
        break;
      }
    }
  }
  return out;
}

FileStore::FileStore(std::filesystem::path root, bool create) : root_(std::move(root)) {
  std::error_code ec;
  if (!std::filesystem::is_directory(root_, ec)) {
    if (!create) fail(ErrorCode::StoreUnavailable, "store root not found: " + root_.string());
    std::filesystem::create_directories(root_, ec);
    if (ec) fail(ErrorCode::StoreUnavailable, "cannot create store root " + root_.string() + ": " + ec.message());
  }
}

std::mutex& FileStore::key_lock(const std::string& canonical) {
  std::lock_guard lock(locks_mutex_);
  auto& slot = key_locks_[canonical];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

void FileStore::maybe_crash(FaultPoint point) {
  if (fault_ && *fault_ == point) {
    fault_.reset();
    throw SimulatedCrash{point};
  }
}

Receipt FileStore::put(const StoreKey& key, const Json& document) {
  validate_document(key, document);
  const std::string bytes = json_io::canonical_dump(document) + "\n";
  const std::string digest = sha256_hex(bytes);
  const auto path = root_ / key.relative_path();

  std::lock_guard serialize(key_lock(key.canonical()));
  if (auto existing = get(key)) {
    if (json_io::canonical_dump(*existing) + "\n" == bytes) return Receipt{key, digest, false};
    fail(ErrorCode::Conflict, "key " + key.canonical() + " already holds different content");
  }

  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) fail(ErrorCode::IoError, "mkdir " + path.parent_path().string() + ": " + ec.message());

  // The document rename is the commit point; the sidecar lands first so a
  // visible document always has its checksum.
  const auto doc_tmp = temp_name(path);
  {
    Fd fd(doc_tmp, O_WRONLY | O_CREAT | O_TRUNC);
    if (fault_ && *fault_ == FaultPoint::TornDocumentWrite) {
      write_all(fd.get(), std::string_view(bytes).substr(0, bytes.size() / 2), doc_tmp);
      maybe_crash(FaultPoint::TornDocumentWrite);
    }
    write_all(fd.get(), bytes, doc_tmp);
    if (::fsync(fd.get()) != 0) fail(ErrorCode::IoError, "fsync " + doc_tmp.string());
  }
  maybe_crash(FaultPoint::AfterDocumentTemp);

  const auto sidecar = sidecar_of(path);
  const auto sidecar_tmp = temp_name(sidecar);
  {
    Fd fd(sidecar_tmp, O_WRONLY | O_CREAT | O_TRUNC);
    write_all(fd.get(), digest + "\n", sidecar_tmp);
    if (::fsync(fd.get()) != 0) fail(ErrorCode::IoError, "fsync " + sidecar_tmp.string());
  }
  rename_or_fail(sidecar_tmp, sidecar);
  maybe_crash(FaultPoint::AfterChecksumRename);

  rename_or_fail(doc_tmp, path);
  ++writes_;
  maybe_crash(FaultPoint::AfterDocumentRename);
  sync_dir(path.parent_path());
  return Receipt{key, digest, true};
}

std::optional<Json> FileStore::get(const StoreKey& key) const {
  const auto path = root_ / key.relative_path();
  auto bytes = read_bytes(path);
  if (!bytes) return std::nullopt;
  auto recorded = read_bytes(sidecar_of(path));
  if (!recorded) fail(ErrorCode::IntegrityError, key.canonical() + ": checksum sidecar missing");
  while (!recorded->empty() && (recorded->back() == '\n' || recorded->back() == '\r')) recorded->pop_back();
  if (sha256_hex(*bytes) != *recorded) fail(ErrorCode::IntegrityError, key.canonical() + ": checksum mismatch");
  try {
    return json_io::parse(*bytes, key.canonical());
  } catch (const Error& e) {
    fail(ErrorCode::IntegrityError, e.what());
  }
}

std::vector<StoreKey> FileStore::list(DocKind kind) const {
  std::vector<StoreKey> out;
  const auto base = root_ / std::string(to_string(kind));
  std::error_code ec;
  if (!std::filesystem::is_directory(base, ec)) return out;
  for (const auto& subject : std::filesystem::directory_iterator(base)) {
    if (!subject.is_directory()) continue;
    for (const auto& window : std::filesystem::directory_iterator(subject.path())) {
      if (!window.is_directory()) continue;
      for (const auto& file : std::filesystem::directory_iterator(window.path())) {
        const auto name = file.path().filename().string();
        if (file.path().extension() != ".json" || name.find(".tmp.") != std::string::npos) continue;
        try {
          out.push_back(StoreKey::parse(std::string(to_string(kind)) + "/" + subject.path().filename().string() +
                                        "/" + window.path().filename().string() + "/" + file.path().stem().string()));
        } catch (const Error&) {
          // foreign file in the tree
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace kiro::storage
