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

#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>
#include <vector>

#include "kiro/error.hpp"
#include "kiro/fetch.hpp"
#include "support.hpp"

namespace kiro::fetch {
namespace {

using kiro::testing::ScriptedTransport;
using namespace std::chrono_literals;

constexpr const char* kUrl = "https://xx.wikipedia.org/w/api.php?q=1";

FetchPolicy fast_policy() {
  FetchPolicy p;
  p.max_in_flight = 2;
  p.min_request_interval = Duration{100};
  p.max_retries = 3;
  p.backoff_initial = Duration{500};
  p.backoff_multiplier = 2.0;
  p.user_agent = "kiro-tests/1.0 (ops@example.org)";
  return p;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no kiro::Error thrown";
  return ErrorCode::InvalidArgument;
}

TEST(FetchPolicy, ValidationRejectsNonsense) {
  FetchPolicy p = fast_policy();
  EXPECT_NO_THROW(p.validate());
  p.max_in_flight = 0;
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::InvalidArgument);
  p = fast_policy();
  p.backoff_multiplier = 1.0;
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::InvalidArgument);
  p = fast_policy();
  p.user_agent.clear();
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::InvalidArgument);
}

TEST(FetchPolicy, BackoffIsExponential) {
  const FetchPolicy p = fast_policy();
  EXPECT_EQ(p.backoff(0), Duration{500});
  EXPECT_EQ(p.backoff(1), Duration{1000});
  EXPECT_EQ(p.backoff(2), Duration{2000});
}

TEST(Urls, ParseAndEncode) {
  const auto u = parse_url("https://ja.wikipedia.org:8443/w/api.php?a=b");
  EXPECT_EQ(u.scheme, "https");
  EXPECT_EQ(u.host, "ja.wikipedia.org:8443");
  EXPECT_EQ(u.target, "/w/api.php?a=b");
  EXPECT_EQ(parse_url("http://h").target, "/");
  EXPECT_EQ(code_of([] { parse_url("ja.wikipedia.org/w"); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(url_encode("a b|c"), "a%20b%7Cc");
  EXPECT_EQ(url_encode("Category:Stubs-_.~"), "Category%3AStubs-_.~");
}

TEST(ManualClockTest, SleepingAdvancesVirtualTime) {
  ManualClock clock(parse_timestamp("2021-05-01T00:00:00Z"));
  const auto t0 = clock.now();
  clock.sleep_for(Duration{1500});
  EXPECT_EQ(clock.now() - t0, Duration{1500});
  EXPECT_EQ(format_timestamp(clock.wall_now()), "2021-05-01T00:00:01Z");
  clock.advance(Duration{500});
  EXPECT_EQ(clock.sleeps(), std::vector<Duration>{Duration{1500}});
}

TEST(Scheduler, RetriesServerErrorsWithBackoff) {
  ScriptedTransport t;
  t.add(kUrl, 503, "");
  t.add(kUrl, 503, "");
  t.add(kUrl, 200, "{\"ok\":true}");
  ManualClock clock;
  FetchScheduler s(t, clock, fast_policy());
  const auto r = s.fetch(kUrl);
  EXPECT_EQ(r.response.status, 200);
  EXPECT_EQ(r.retries, 2u);
  EXPECT_EQ(t.calls(), 3u);
  const auto sleeps = clock.sleeps();
  EXPECT_NE(std::find(sleeps.begin(), sleeps.end(), Duration{500}), sleeps.end());
  EXPECT_NE(std::find(sleeps.begin(), sleeps.end(), Duration{1000}), sleeps.end());
  const auto tel = s.telemetry();
  EXPECT_EQ(tel.requests, 3u);
  EXPECT_EQ(tel.retries, 2u);
}

TEST(Scheduler, HonoursRetryAfterOn429) {
  ScriptedTransport t;
  t.add(kUrl, 429, "", {{"retry-after", "2"}});
  t.add(kUrl, 200, "{}");
  ManualClock clock;
  FetchScheduler s(t, clock, fast_policy());
  EXPECT_EQ(s.fetch(kUrl).retries, 1u);
  const auto sleeps = clock.sleeps();
  EXPECT_NE(std::find(sleeps.begin(), sleeps.end(), Duration{2000}), sleeps.end());
}

TEST(Scheduler, NonRetryableStatusReturnsImmediately) {
  ScriptedTransport t;
  ManualClock clock;
  FetchScheduler s(t, clock, fast_policy());
  const auto r = s.fetch(kUrl);  // unscripted: 404
  EXPECT_EQ(r.response.status, 404);
  EXPECT_EQ(r.retries, 0u);
  EXPECT_TRUE(clock.sleeps().empty());
}

TEST(Scheduler, ExhaustedRetriesRaiseNetworkError) {
  ScriptedTransport t;
  t.add(kUrl, 500, "");
  ManualClock clock;
  FetchScheduler s(t, clock, fast_policy());
  EXPECT_EQ(code_of([&] { s.fetch(kUrl); }), ErrorCode::NetworkError);
  EXPECT_EQ(t.calls(), 4u);  // first attempt plus three retries
}

TEST(Scheduler, TransportFailuresAreRetried) {
  ScriptedTransport t;
  t.fail_with_network_error(kUrl);
  t.add(kUrl, 200, "{}");
  ManualClock clock;
  FetchScheduler s(t, clock, fast_policy());
  EXPECT_EQ(s.fetch(kUrl).retries, 1u);
}

TEST(Scheduler, SendsUserAgent) {
  ScriptedTransport t;
  t.add(kUrl, 200, "{}");
  ManualClock clock;
  FetchScheduler s(t, clock, fast_policy());
  s.fetch(kUrl);
  EXPECT_EQ(t.last_headers().at("User-Agent"), "kiro-tests/1.0 (ops@example.org)");
}

TEST(Scheduler, SpacesRequestsToTheSameHost) {
  ScriptedTransport t;
  ManualClock clock;
  FetchScheduler s(t, clock, fast_policy());
  for (int i = 0; i < 5; ++i) s.fetch(std::string(kUrl) + std::to_string(i));
  s.fetch("https://other.example.org/x");
  const auto log = s.telemetry().log;
  ASSERT_EQ(log.size(), 6u);
  for (std::size_t i = 1; i < 5; ++i) {
    EXPECT_GE(log[i].started - log[i - 1].started, Duration{100});
  }
  // A different host has its own spacing and may start at once.
  EXPECT_EQ(log[5].started, clock.now());
}

/// Blocks each request briefly in real time and tracks overlap.
class SlowTransport final : public Transport {
 public:
  HttpResponse get(const HttpRequest&) override {
    const int now = ++active_;
    int seen = peak_.load();
    while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(20ms);
    --active_;
    return {200, "{}", {}};
  }
  int peak() const { return peak_.load(); }

 private:
  std::atomic<int> active_{0};
  std::atomic<int> peak_{0};
};

TEST(Scheduler, CapsConcurrencyPerHost) {
  SlowTransport t;
  ManualClock clock;
  FetchPolicy p = fast_policy();
  p.max_in_flight = 2;
  p.min_request_interval = Duration{0};
  FetchScheduler s(t, clock, p);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) threads.emplace_back([&, i] { s.fetch(std::string(kUrl) + std::to_string(i)); });
  for (auto& th : threads) th.join();
  EXPECT_LE(t.peak(), 2);
  EXPECT_LE(s.telemetry().max_concurrent, 2u);
  EXPECT_EQ(s.telemetry().requests, 8u);
}

TEST(Replay, ServesRecordedExchangesInOrder) {
  ReplayTransport r(kiro::testing::recorded_dir() / "ja");
  EXPECT_GT(r.exchange_count(), 0u);
  const std::string siteinfo =
      "https://ja.wikipedia.org/w/api.php?action=query&format=json&formatversion=2&meta=siteinfo&siprop=statistics";
  EXPECT_EQ(r.get(HttpRequest{siteinfo, {}, {}}).status, 503);
  EXPECT_EQ(r.get(HttpRequest{siteinfo, {}, {}}).status, 200);
  EXPECT_EQ(r.get(HttpRequest{siteinfo, {}, {}}).status, 200);  // last one repeats
  EXPECT_EQ(r.get(HttpRequest{"https://ja.wikipedia.org/unrecorded", {}, {}}).status, 404);
}

TEST(Replay, MissingCorpusIsFileNotFound) {
  EXPECT_EQ(code_of([] { ReplayTransport r("/nonexistent/corpus"); }), ErrorCode::FileNotFound);
}

}  // namespace
}  // namespace kiro::fetch
