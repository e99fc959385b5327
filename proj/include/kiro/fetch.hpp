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

// Network plumbing for the fetchers: a swappable transport, an injectable
// clock, and a per-host scheduler that enforces the fetch policy (concurrency
// cap, request spacing, retry with exponential backoff, Retry-After on 429).

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kiro/model.hpp"

namespace kiro::fetch {

using Duration = std::chrono::milliseconds;
using TimePoint = std::chrono::steady_clock::time_point;

struct FetchPolicy {
  std::size_t max_in_flight = 2;
  Duration min_request_interval{100};
  std::size_t max_retries = 3;
  Duration backoff_initial{500};
  double backoff_multiplier = 2.0;
  Duration timeout{30000};
  std::string user_agent = "kiro-observatory/0.1 (set user_agent to an operator contact)";

  /// Throws InvalidArgument unless max_in_flight >= 1, multiplier > 1 and a
  /// user agent is set.
  void validate() const;
  Duration backoff(std::size_t attempt) const;
};

struct HttpRequest {
  std::string url;
  std::map<std::string, std::string> headers;
  Duration timeout{30000};
};

struct HttpResponse {
  int status = 0;
  std::string body;
  std::map<std::string, std::string> headers;  // lower-cased names
};

/// Splits "scheme://host[:port]/path?query". Throws InvalidArgument.
struct ParsedUrl {
  std::string scheme;
  std::string host;  // includes ":port" when present
  std::string target;
};
ParsedUrl parse_url(std::string_view url);

std::string url_encode(std::string_view text);

class Transport {
 public:
  virtual ~Transport() = default;
  /// Throws Error(NetworkError) when no HTTP response could be obtained.
  virtual HttpResponse get(const HttpRequest& request) = 0;
};

/// cpp-httplib backed transport (http and https).
class HttpTransport final : public Transport {
 public:
  HttpResponse get(const HttpRequest& request) override;
};

/// Replays a recorded corpus: every directory holding request.json,
/// response.body and response.status is one exchange. Exchanges for the same
/// URL are served in directory-name order; the last one repeats once the
/// sequence is exhausted. Unrecorded URLs get a 404.
class ReplayTransport final : public Transport {
 public:
  explicit ReplayTransport(const std::filesystem::path& root);
  HttpResponse get(const HttpRequest& request) override;
  std::size_t exchange_count() const noexcept { return total_; }

 private:
  struct Sequence {
    std::vector<HttpResponse> responses;
    std::size_t next = 0;
  };
  std::mutex mutex_;
  std::map<std::string, Sequence> by_url_;
  std::size_t total_ = 0;
};

class Clock {
 public:
  virtual ~Clock() = default;
  virtual TimePoint now() = 0;
  virtual Timestamp wall_now() = 0;
  virtual void sleep_until(TimePoint t) = 0;
  void sleep_for(Duration d) { sleep_until(now() + d); }
};

class SystemClock final : public Clock {
 public:
  TimePoint now() override { return std::chrono::steady_clock::now(); }
  Timestamp wall_now() override;
  void sleep_until(TimePoint t) override;
};

/// Virtual time: sleeping advances the clock instantly and is recorded.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Timestamp wall = Timestamp{}) : wall_(wall) {}
  TimePoint now() override;
  Timestamp wall_now() override;
  void sleep_until(TimePoint t) override;
  void advance(Duration d);
  std::vector<Duration> sleeps() const;

 private:
  mutable std::mutex mutex_;
  TimePoint now_{};
  Timestamp wall_;
  std::vector<Duration> sleeps_;
};

struct RequestRecord {
  std::string url;
  std::string host;
  std::size_t attempt = 0;
  TimePoint started{};
  int status = 0;  // 0 when the transport threw
};

struct FetchTelemetry {
  std::size_t requests = 0;
  std::size_t retries = 0;
  std::size_t max_concurrent = 0;  // peak per-host in-flight count observed
  std::vector<RequestRecord> log;
};

struct FetchResult {
  HttpResponse response;
  std::size_t retries = 0;
};

class FetchScheduler {
 public:
  FetchScheduler(Transport& transport, Clock& clock, FetchPolicy policy);

  /// Performs the request under the policy. Returns the final response for
  /// non-retryable statuses; throws NetworkError once retries are exhausted.
  FetchResult fetch(const std::string& url);

  FetchTelemetry telemetry() const;
  const FetchPolicy& policy() const noexcept { return policy_; }

 private:
  struct HostState {
    std::size_t in_flight = 0;
    std::optional<TimePoint> next_start;
  };

  TimePoint acquire(const std::string& host);
  void release(const std::string& host);
  void record(RequestRecord r);

  Transport& transport_;
  Clock& clock_;
  FetchPolicy policy_;

  mutable std::mutex mutex_;
  std::condition_variable slot_freed_;
  std::map<std::string, HostState> hosts_;
  FetchTelemetry telemetry_;
};

}  // namespace kiro::fetch
