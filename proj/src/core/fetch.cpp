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

#include "kiro/fetch.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "kiro/error.hpp"
#include "kiro/json_io.hpp"

namespace kiro::fetch {
namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::FileNotFound, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::optional<Duration> retry_after(const HttpResponse& r) {
  auto it = r.headers.find("retry-after");
  if (it == r.headers.end()) return std::nullopt;
  try {
    std::size_t pos = 0;
    const long secs = std::stol(it->second, &pos);
    if (pos != it->second.size() || secs < 0) return std::nullopt;
    return std::chrono::duration_cast<Duration>(std::chrono::seconds(secs));
  } catch (const std::exception&) {
    return std::nullopt;  // HTTP-date form: fall back to the backoff schedule
  }
}

}  // namespace

void FetchPolicy::validate() const {
  if (max_in_flight < 1) fail(ErrorCode::InvalidArgument, "fetch policy: max_in_flight must be >= 1");
  if (!(backoff_multiplier > 1.0)) {
    fail(ErrorCode::InvalidArgument, "fetch policy: backoff multiplier must be > 1");
  }
  if (min_request_interval.count() < 0 || backoff_initial.count() < 0 || timeout.count() <= 0) {
    fail(ErrorCode::InvalidArgument, "fetch policy: durations must be non-negative");
  }
  if (user_agent.empty()) fail(ErrorCode::InvalidArgument, "fetch policy: user_agent is required");
}

Duration FetchPolicy::backoff(std::size_t attempt) const {
  const double ms = static_cast<double>(backoff_initial.count()) *
                    std::pow(backoff_multiplier, static_cast<double>(attempt));
  return Duration(static_cast<Duration::rep>(std::llround(ms)));
}

ParsedUrl parse_url(std::string_view url) {
  const auto sep = url.find("://");
  if (sep == std::string_view::npos) fail(ErrorCode::InvalidArgument, "URL without scheme: " + std::string(url));
  ParsedUrl out;
  out.scheme = std::string(url.substr(0, sep));
  const auto rest = url.substr(sep + 3);
  const auto slash = rest.find('/');
  out.host = std::string(rest.substr(0, slash));
  out.target = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  if (out.host.empty()) fail(ErrorCode::InvalidArgument, "URL without host: " + std::string(url));
  return out;
}

std::string url_encode(std::string_view text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 0xF];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

HttpResponse HttpTransport::get(const HttpRequest& request) {
  const auto url = parse_url(request.url);
  httplib::Client client(url.scheme + "://" + url.host);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_follow_location(true);

  httplib::Headers headers;
  for (const auto& [k, v] : request.headers) headers.emplace(k, v);
  auto result = client.Get(url.target, headers);
  if (!result) {
    fail(ErrorCode::NetworkError,
         "GET " + request.url + " failed: " + httplib::to_string(result.error()));
  }
  HttpResponse out;
  out.status = result->status;
  out.body = result->body;
  for (const auto& [k, v] : result->headers) out.headers[lower(k)] = v;
  return out;
}

ReplayTransport::ReplayTransport(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root)) {
    fail(ErrorCode::FileNotFound, "recorded payload directory not found: " + root.string());
  }
  std::vector<std::filesystem::path> dirs;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().filename() == "request.json") {
      dirs.push_back(entry.path().parent_path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    const auto request = json_io::parse(read_file(dir / "request.json"), (dir / "request.json").string());
    if (!request.contains("url") || !request["url"].is_string()) {
      fail(ErrorCode::ParseError, (dir / "request.json").string() + ": missing url");
    }
    HttpResponse response;
    response.body = read_file(dir / "response.body");
    const auto status_text = read_file(dir / "response.status");
    try {
      response.status = std::stoi(status_text);
    } catch (const std::exception&) {
      fail(ErrorCode::ParseError, (dir / "response.status").string() + ": not an HTTP status");
    }
    if (request.contains("response_headers")) {
      for (auto it = request["response_headers"].begin(); it != request["response_headers"].end(); ++it) {
        response.headers[lower(it.key())] = it.value().get<std::string>();
      }
    }
    by_url_[request["url"].get<std::string>()].responses.push_back(std::move(response));
    ++total_;
  }
}

HttpResponse ReplayTransport::get(const HttpRequest& request) {
  std::lock_guard lock(mutex_);
  auto it = by_url_.find(request.url);
  if (it == by_url_.end()) {
    return HttpResponse{404, R"({"error":"not recorded"})", {}};
  }
  auto& seq = it->second;
  const auto& r = seq.responses[std::min(seq.next, seq.responses.size() - 1)];
  if (seq.next < seq.responses.size()) ++seq.next;
  return r;
}

// ---------------------------------------------------------------------------

Timestamp SystemClock::wall_now() {
  return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

void SystemClock::sleep_until(TimePoint t) { std::this_thread::sleep_until(t); }

TimePoint ManualClock::now() {
  std::lock_guard lock(mutex_);
  return now_;
}

Timestamp ManualClock::wall_now() {
  std::lock_guard lock(mutex_);
  return wall_ + std::chrono::duration_cast<std::chrono::seconds>(now_.time_since_epoch());
}

void ManualClock::sleep_until(TimePoint t) {
  std::lock_guard lock(mutex_);
  if (t > now_) {
    sleeps_.push_back(std::chrono::duration_cast<Duration>(t - now_));
    now_ = t;
  }
}

void ManualClock::advance(Duration d) {
  std::lock_guard lock(mutex_);
  now_ += d;
}

std::vector<Duration> ManualClock::sleeps() const {
  std::lock_guard lock(mutex_);
  return sleeps_;
}

// ---------------------------------------------------------------------------

FetchScheduler::FetchScheduler(Transport& transport, Clock& clock, FetchPolicy policy)
    : transport_(transport), clock_(clock), policy_(std::move(policy)) {
  policy_.validate();
}

TimePoint FetchScheduler::acquire(const std::string& host) {
  std::unique_lock lock(mutex_);
  auto& state = hosts_[host];
  slot_freed_.wait(lock, [&] { return state.in_flight < policy_.max_in_flight; });
  TimePoint start = clock_.now();
  if (state.next_start && *state.next_start > start) start = *state.next_start;
  state.next_start = start + policy_.min_request_interval;
  ++state.in_flight;
  telemetry_.max_concurrent = std::max(telemetry_.max_concurrent, state.in_flight);
  return start;
}

void FetchScheduler::release(const std::string& host) {
  {
    std::lock_guard lock(mutex_);
    --hosts_[host].in_flight;
  }
  slot_freed_.notify_all();
}

void FetchScheduler::record(RequestRecord r) {
  std::lock_guard lock(mutex_);
  ++telemetry_.requests;
  if (r.attempt > 0) ++telemetry_.retries;
  telemetry_.log.push_back(std::move(r));
}

FetchResult FetchScheduler::fetch(const std::string& url) {
  const auto host = parse_url(url).host;
  HttpRequest request{url, {{"User-Agent", policy_.user_agent}, {"Accept", "application/json"}},
                      policy_.timeout};

  for (std::size_t attempt = 0;; ++attempt) {
    const TimePoint start = acquire(host);
    clock_.sleep_until(start);

    std::optional<HttpResponse> response;
    std::string failure;
    try {
      response = transport_.get(request);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NetworkError) {
        release(host);
        throw;
      }
      failure = e.what();
    } catch (...) {
      release(host);
      throw;
    }
    release(host);
    record(RequestRecord{url, host, attempt, start, response ? response->status : 0});

    const bool retryable = !response || response->status == 429 || response->status >= 500;
    if (!retryable) return FetchResult{std::move(*response), attempt};

    if (attempt >= policy_.max_retries) {
      const std::string why = response ? "HTTP " + std::to_string(response->status) : failure;
      fail(ErrorCode::NetworkError,
           "GET " + url + ": " + why + " after " + std::to_string(attempt) + " retries");
    }
    Duration delay = policy_.backoff(attempt);
    if (response && response->status == 429) {
      if (auto ra = retry_after(*response)) delay = *ra;
    }
    clock_.sleep_for(delay);
  }
}

FetchTelemetry FetchScheduler::telemetry() const {
  std::lock_guard lock(mutex_);
  return telemetry_;
}

}  // namespace kiro::fetch
