// Copyright 2026 The btdiag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not
// use this file except in compliance with the License. You may obtain a copy of
// the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations under
// the License.

// End to end over loopback TCP: emulator stream server on one thread, client
// session on another.

#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "btdiag/diag.h"
#include "btdiag/session.h"
#include "btdiag/stream_server.h"
#include "test_support.h"

namespace btdiag {
namespace {

class Network : public ::testing::Test {
 protected:
  void SetUp() override {
    sim_.AddController(testing::Config("a", "00:1a:7d:da:71:01"));
    sim_.AddController(testing::Config("b", "00:1a:7d:da:71:02"));
    sim_.AttachAirLink("a", "b");
    server_ = std::make_unique<emu::StreamServer>(sim_, emu::StreamServer::Options{.ephemeral_ports = true});
    server_->Start();
    thread_ = std::thread([this] { server_->Run(); });
  }
  void TearDown() override { StopServer(); }
  void StopServer() {
    if (!thread_.joinable()) return;
    server_->Stop();
    thread_.join();
  }
  std::unique_ptr<cli::TcpTransport> Connect(const std::string& name) {
    return std::make_unique<cli::TcpTransport>("127.0.0.1", server_->inject_port(name), "127.0.0.1",
                                               server_->sniff_port(name));
  }

  emu::Simulation sim_;
  std::unique_ptr<emu::StreamServer> server_;
  std::thread thread_;
};

TEST_F(Network, PortsAreDistinct) {
  std::set<uint16_t> ports{server_->sniff_port("a"), server_->inject_port("a"), server_->sniff_port("b"),
                           server_->inject_port("b")};
  EXPECT_EQ(ports.size(), 4u);
  EXPECT_EQ(server_->sniff_port("nobody"), 0);
}

TEST_F(Network, CommandsOverTcp) {
  auto transport = Connect("a");
  cli::Session session(*transport);
  auto r = session.Execute("version");
  ASSERT_TRUE(r.ok) << r.output;
  EXPECT_NE(r.output.find("Read_Local_Version_Information"), std::string::npos);
  ASSERT_TRUE(session.Execute("diag on").ok);
  r = session.Execute("connect 00:1a:7d:da:71:02");
  ASSERT_TRUE(r.ok) << r.output;
  r = session.Execute("stats br");
  ASSERT_TRUE(r.ok) << r.output;
  EXPECT_GE(session.records_seen(), 6u);
}

TEST_F(Network, TwoSessionsSeeTheirOwnController) {
  auto ta = Connect("a");
  auto tb = Connect("b");
  cli::Session a(*ta);
  cli::Session b(*tb);
  ASSERT_TRUE(a.Execute("connect 00:1a:7d:da:71:02").ok);
  // b's host hears about the incoming link.
  ASSERT_TRUE(b.Execute("bdaddr").ok);
  EXPECT_GT(b.records_seen(), 2u);
}

TEST_F(Network, SniffCarriesBothDirections) {
  auto transport = Connect("a");
  std::vector<std::string> lines;
  std::mutex mu;
  cli::Session session(*transport, [&](const std::string& l) {
    std::lock_guard lock(mu);
    lines.push_back(l);
  });
  session.Execute("live on");
  ASSERT_TRUE(session.Execute("version").ok);
  std::lock_guard lock(mu);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_NE(lines[0].find("H->C"), std::string::npos) << lines[0];
  EXPECT_NE(lines[1].find("C->H"), std::string::npos) << lines[1];
}

TEST_F(Network, ServerShutdownIsReported) {
  auto transport = Connect("a");
  std::atomic<int> notices{0};
  cli::Session session(*transport, [&](const std::string& l) {
    if (l.starts_with("***")) ++notices;
  });
  ASSERT_TRUE(session.Execute("version").ok);
  StopServer();
  server_.reset();
  for (int i = 0; i < 200 && notices < 2; ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
  EXPECT_GE(notices.load(), 1);
  auto r = session.Execute("version");
  EXPECT_FALSE(r.ok);
}

// Live lines a session printed, safe to read from the test thread.
class Lines {
 public:
  cli::Session::OutputSink Sink() {
    return [this](const std::string& l) {
      std::lock_guard lock(mu_);
      lines_.push_back(l);
    };
  }
  std::vector<std::string> Get() const {
    std::lock_guard lock(mu_);
    return lines_;
  }
  size_t Count(const std::string& needle) const {
    size_t n = 0;
    for (const auto& l : Get()) n += l.find(needle) != std::string::npos;
    return n;
  }

 private:
  mutable std::mutex mu_;
  std::vector<std::string> lines_;
};

TEST_F(Network, InjectedLmpReachesThePeerLog) {
  auto ta = Connect("a");
  auto tb = Connect("b");
  Lines peer;
  cli::Session a(*ta);
  cli::Session b(*tb, peer.Sink());
  ASSERT_TRUE(b.Execute("diag on").ok);
  ASSERT_TRUE(b.Execute("live on").ok);
  ASSERT_TRUE(a.Execute("connect 00:1a:7d:da:71:02").ok);
  // A round trip on b's own streams flushes everything sniffed before it.
  ASSERT_TRUE(b.Execute("version").ok);
  const std::string rx = std::string(diag::DiagCodeName(diag::DiagCode::kLmpReceived));
  size_t before = peer.Count(rx);
  size_t features_before = peer.Count("LMP_features_req ");
  ASSERT_GT(before, 0u);

  auto r = a.Execute("sendlmp 0x000b 4f ff ff 8f fe db ff 5b 87");
  ASSERT_TRUE(r.ok) << r.output;
  ASSERT_TRUE(b.Execute("version").ok);
  EXPECT_EQ(peer.Count(rx), before + 1);
  EXPECT_EQ(peer.Count("LMP_features_req "), features_before + 1);
}

TEST_F(Network, QuietStreamPrintsNothing) {
  auto transport = Connect("a");
  Lines lines;
  cli::Session session(*transport, lines.Sink());
  session.Execute("live on");
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  EXPECT_TRUE(lines.Get().empty());
}

TEST_F(Network, LiveViewKeepsEveryFrameInOrder) {
  auto transport = Connect("a");
  Lines lines;
  cli::Session session(*transport, lines.Sink());
  session.Execute("live on");
  // 5000 commands and their 5000 completions.
  std::string batch = "raw";
  for (int i = 0; i < 100; ++i) batch += " 01 01 10 00";
  for (int i = 0; i < 50; ++i) ASSERT_TRUE(session.Execute(batch).ok);
  auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(10);
  while (session.records_seen() < 10000 && std::chrono::steady_clock::now() < deadline) {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  auto got = lines.Get();
  ASSERT_EQ(got.size(), 10000u);
  // The controller answers each command before reading the next.
  std::string last_stamp;
  for (size_t i = 0; i < got.size(); ++i) {
    ASSERT_NE(got[i].find(i % 2 ? "C->H" : "H->C"), std::string::npos) << i << ": " << got[i];
    std::string stamp = got[i].substr(0, got[i].find(']'));
    ASSERT_GE(stamp, last_stamp) << i;
    last_stamp = stamp;
  }
}

TEST(NetworkErrors, UnreachablePortThrows) {
  EXPECT_THROW(cli::TcpTransport("127.0.0.1", 1, "127.0.0.1", 1), Error);
}

}  // namespace
}  // namespace btdiag
