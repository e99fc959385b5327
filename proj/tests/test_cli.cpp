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
#include <httplib.h>

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <thread>

#include "interface_support.hpp"

namespace {

using kiro::interface_testing::cli_path;
using kiro::interface_testing::data_dir;
using kiro::interface_testing::read_text;
using kiro::interface_testing::run_cli;
using kiro::interface_testing::TempDir;
using kiro::interface_testing::tree_contents;

std::vector<std::string> with_store(const TempDir& dir, std::vector<std::string> args) {
  std::vector<std::string> out{"--config", (data_dir() / "observatory.json").string(), "--store",
                               (dir / "store").string()};
  out.insert(out.end(), args.begin(), args.end());
  return out;
}

std::string fixtures() { return (data_dir() / "fixtures" / "snapshots").string(); }
std::filesystem::path goldens() { return data_dir() / "goldens" / "e2e" / "2021-04"; }

TEST(Cli, HelpAndVersion) {
  EXPECT_EQ(run_cli({"--help"}).exit_code, 0);
  const auto v = run_cli({"--version"});
  EXPECT_EQ(v.exit_code, 0);
  EXPECT_FALSE(v.out.empty());
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli({}).exit_code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).exit_code, 2);
  EXPECT_EQ(run_cli({"compute"}).exit_code, 2);  // --window is required
  EXPECT_EQ(run_cli({"--config", "/nonexistent.json", "compute", "--window", "2021-04"}).exit_code, 2);
  EXPECT_EQ(run_cli({"scatter", "--window", "2021-04", "--min-articles", "0"}).exit_code, 2);
}

TEST(Cli, EndToEndMatchesGoldensAndRerunIsIdempotent) {
  TempDir dir;
  const auto ingest = run_cli(with_store(dir, {"ingest", "--window", "2021-04", "--fixtures", fixtures()}));
  ASSERT_EQ(ingest.exit_code, 0) << ingest.err;
  EXPECT_NE(ingest.out.find("27 of 27"), std::string::npos) << ingest.out;
  ASSERT_EQ(run_cli(with_store(dir, {"compute", "--window", "2021-04"})).exit_code, 0);
  const auto fig = dir / "fig";
  const auto scatter = run_cli(with_store(dir, {"scatter", "--window", "2021-04", "--out", fig.string()}));
  ASSERT_EQ(scatter.exit_code, 0) << scatter.err;
  EXPECT_EQ(read_text(fig / "scatter.csv"), read_text(goldens() / "scatter.csv"));
  EXPECT_EQ(read_text(fig / "fit.json"), read_text(goldens() / "fit.json"));
  const auto out = dir / "export";
  ASSERT_EQ(run_cli(with_store(dir, {"export", "--window", "2021-04", "--out", out.string()})).exit_code, 0);
  EXPECT_EQ(read_text(out / "matrix.json"), read_text(goldens() / "matrix.json"));
  EXPECT_EQ(read_text(out / "scatter.json"), read_text(goldens() / "scatter.json"));

  const auto before = tree_contents(dir / "store");
  EXPECT_EQ(run_cli(with_store(dir, {"ingest", "--window", "2021-04", "--fixtures", fixtures()})).exit_code, 0);
  EXPECT_EQ(run_cli(with_store(dir, {"compute", "--window", "2021-04"})).exit_code, 0);
  EXPECT_EQ(tree_contents(dir / "store"), before);
}

TEST(Cli, UnknownWikiFailsWithTable) {
  TempDir dir;
  const auto r = run_cli(with_store(dir, {"ingest", "--window", "2021-04", "--wikis", "ja,xx", "--fixtures", fixtures()}));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("xx"), std::string::npos);
  EXPECT_NE(r.err.find("unknown_wiki"), std::string::npos);
}

TEST(Cli, ComputeWithoutSnapshotsFails) {
  TempDir dir;
  const auto r = run_cli(with_store(dir, {"compute", "--window", "2021-04"}));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("no_data"), std::string::npos);
}

TEST(Cli, ReplayIngestNeedsNoNetwork) {
  TempDir dir;
  const auto corpus = (data_dir() / "fixtures" / "recorded" / "ceb").string();
  const auto r = run_cli(with_store(dir, {"ingest", "--window", "2021-04", "--wikis", "ceb", "--replay", corpus}));
  EXPECT_EQ(r.exit_code, 0) << r.err;
}

TEST(Cli, OutputUnderRegularFileIsIoError) {
  TempDir dir;
  ASSERT_EQ(run_cli(with_store(dir, {"ingest", "--window", "2021-04", "--fixtures", fixtures()})).exit_code, 0);
  { std::ofstream(dir / "plain") << "x"; }
  const auto r = run_cli(with_store(dir, {"scatter", "--window", "2021-04", "--out", (dir / "plain/sub").string()}));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("io_error"), std::string::npos) << r.err;
}

/// Starts `kiro serve` with stdout on a pipe; returns the pid and the port it reports.
std::pair<pid_t, int> start_server(const TempDir& dir, const std::string& port) {
  int fds[2];
  if (::pipe(fds) != 0) return {-1, -1};
  const pid_t pid = ::fork();
  if (pid == 0) {
    ::dup2(fds[1], STDOUT_FILENO);
    ::close(fds[0]);
    ::close(fds[1]);
    auto args = with_store(dir, {"serve", "--host", "127.0.0.1", "--port", port});
    std::vector<char*> argv;
    const std::string binary = cli_path().string();
    argv.push_back(const_cast<char*>(binary.c_str()));
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    ::execv(binary.c_str(), argv.data());
    ::_exit(127);
  }
  ::close(fds[1]);
  std::string line;
  char c = 0;
  while (::read(fds[0], &c, 1) == 1 && c != '\n') line += c;
  ::close(fds[0]);
  const auto at = line.rfind(' ');
  if (line.rfind("listening on port ", 0) != 0 || at == std::string::npos) return {pid, -1};
  return {pid, std::stoi(line.substr(at + 1))};
}

int wait_exit(pid_t pid) {
  int status = 0;
  for (int i = 0; i < 200; ++i) {
    if (::waitpid(pid, &status, WNOHANG) == pid) return WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  ::kill(pid, SIGKILL);
  ::waitpid(pid, &status, 0);
  return -1;
}

TEST(Cli, ServeAnswersAndExitsCleanlyOnSigterm) {
  TempDir dir;
  ASSERT_EQ(run_cli(with_store(dir, {"ingest", "--window", "2021-04", "--fixtures", fixtures()})).exit_code, 0);
  ASSERT_EQ(run_cli(with_store(dir, {"compute", "--window", "2021-04"})).exit_code, 0);
  const auto [pid, port] = start_server(dir, "0");
  ASSERT_GT(port, 0);
  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/api/v1/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  auto matrix = client.Get("/api/v1/matrix");
  ASSERT_TRUE(matrix);
  EXPECT_EQ(matrix->body + "\n", read_text(goldens() / "matrix.json"));

  // A second server on the same port must fail rather than share it.
  const auto [clash_pid, clash_port] = start_server(dir, std::to_string(port));
  EXPECT_EQ(clash_port, -1);
  EXPECT_NE(wait_exit(clash_pid), 0);

  ::kill(pid, SIGTERM);
  EXPECT_EQ(wait_exit(pid), 0);
}

}  // namespace
