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

// Helpers shared by the test binaries: scratch directories, paths to the
// bundled data, a scripted transport and a snapshot builder.

#include <atomic>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <string>

#include "kiro/fetch.hpp"
#include "kiro/model.hpp"

namespace kiro::testing {

inline std::filesystem::path data_dir() { return KIRO_TEST_DATA_DIR; }
inline std::filesystem::path fixtures_dir() { return data_dir() / "fixtures" / "snapshots"; }
inline std::filesystem::path recorded_dir() { return data_dir() / "fixtures" / "recorded"; }

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary | std::ios::trunc) << text;
}

/// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("kiro-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

/// Serves queued responses per URL (the last one repeats); 404 otherwise.
class ScriptedTransport final : public fetch::Transport {
 public:
  void add(const std::string& url, int status, std::string body, std::map<std::string, std::string> headers = {}) {
    std::lock_guard lock(mutex_);
    script_[url].push_back(fetch::HttpResponse{status, std::move(body), std::move(headers)});
  }
  void fail_with_network_error(const std::string& url) {
    std::lock_guard lock(mutex_);
    network_errors_[url]++;
  }
  fetch::HttpResponse get(const fetch::HttpRequest& request) override {
    std::lock_guard lock(mutex_);
    ++calls_;
    last_headers_ = request.headers;
    if (auto it = network_errors_.find(request.url); it != network_errors_.end() && it->second > 0) {
      --it->second;
      throw Error(ErrorCode::NetworkError, "connection reset");
    }
    auto it = script_.find(request.url);
    if (it == script_.end()) return {404, "{}", {}};
    auto& q = it->second;
    fetch::HttpResponse r = q.front();
    if (q.size() > 1) q.pop_front();
    return r;
  }
  std::size_t calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
  }
  std::map<std::string, std::string> last_headers() const {
    std::lock_guard lock(mutex_);
    return last_headers_;
  }

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::deque<fetch::HttpResponse>> script_;
  std::map<std::string, int> network_errors_;
  std::map<std::string, std::string> last_headers_;
  std::size_t calls_ = 0;
};

inline MonthWindow april_2021() { return MonthWindow::single(Month{2021, 4}); }

/// A small but complete snapshot with edits and views distributions.
inline WikiSnapshot make_snapshot(const std::string& code, std::uint64_t articles,
                                  const std::map<std::string, double>& edits,
                                  const std::map<std::string, double>& views,
                                  MonthWindow window = april_2021()) {
  WikiSnapshot s;
  s.wiki = WikiId{code, "wikipedia"};
  s.window = window;
  s.captured_at = parse_timestamp("2021-05-01T00:00:00Z");
  s.site_stats.articles = articles;
  s.site_stats.total_pages = articles * 3;
  s.site_stats.edits = articles * 20;
  s.site_stats.editors = 10000;
  s.site_stats.active_editors = 4800;
  if (!edits.empty()) s.distributions.push_back(CountryDistribution{CountrySubject::Edits, window, edits});
  if (!views.empty()) s.distributions.push_back(CountryDistribution{CountrySubject::Views, window, views});
  return s;
}

}  // namespace kiro::testing
