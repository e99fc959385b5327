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

// Read-only HTTP facade over a document store. Routing is a pure function
// from request to response (ApiRouter) so it can be exercised without
// sockets; Server binds it to cpp-httplib.

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <thread>

#include "kiro/model.hpp"
#include "kiro/storage.hpp"

namespace kiro::service {

inline constexpr std::string_view kApiVersion = "1";
inline constexpr std::size_t kDefaultPageLimit = 100;
inline constexpr std::size_t kMaxPageLimit = 1000;

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string cors_origin = "*";
  std::uint64_t default_min_articles = 500000;
};

struct ApiRequest {
  std::string method = "GET";
  std::string path;
  std::multimap<std::string, std::string> query;
};

struct ApiResponse {
  int status = 200;
  std::string body;  // canonical JSON
  std::map<std::string, std::string> headers;
};

class ApiRouter {
 public:
  ApiRouter(const storage::DocumentReader& store, const IndicatorRegistry& registry, ServiceConfig config);

  /// Never throws; every failure becomes an error body {code, message}.
  ApiResponse handle(const ApiRequest& request) const;

 private:
  const storage::DocumentReader& store_;
  const IndicatorRegistry& registry_;
  ServiceConfig config_;
};

class Server {
 public:
  /// Binds immediately (BindError when the address is taken) and starts
  /// serving on a background thread.
  Server(const storage::DocumentReader& store, const IndicatorRegistry& registry, ServiceConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  int port() const noexcept { return port_; }
  /// Stops accepting, lets in-flight requests finish, joins the worker.
  void stop();
  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace kiro::service
