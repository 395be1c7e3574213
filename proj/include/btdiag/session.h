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

// Client session: executes operator commands against one controller reached
// through a Transport, renders responses, and optionally records captures.

#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "btdiag/capture.h"
#include "btdiag/cli.h"
#include "btdiag/simulation.h"

namespace btdiag::cli {

class Transport {
 public:
  using RecordHandler = std::function<void(const capture::SniffRecord&)>;
  using DisconnectHandler = std::function<void(const std::string&)>;

  virtual ~Transport() = default;

  // Installed once, before any other call. The handler may run on a
  // transport-owned thread.
  virtual void SetHandlers(RecordHandler on_record, DisconnectHandler on_disconnect) = 0;
  // Stops handler delivery; called when the session goes away.
  virtual void Detach() = 0;
  virtual bool InjectUp() const = 0;
  virtual bool Send(const h4::H4Frame& frame) = 0;
  // Lets pending traffic arrive. False when nothing more can arrive before
  // `deadline`.
  virtual bool Pump(std::chrono::steady_clock::time_point deadline) = 0;
  // Lets `ticks` baseband slots pass.
  virtual void Wait(uint64_t ticks) = 0;
};

// Talks to a controller inside an in-process Simulation. Sniff records are
// produced synchronously while the simulation runs.
class LoopbackTransport : public Transport {
 public:
  LoopbackTransport(emu::Simulation& sim, std::string controller);
  ~LoopbackTransport() override;

  void SetHandlers(RecordHandler on_record, DisconnectHandler on_disconnect) override;
  void Detach() override { *on_record_ = nullptr; }
  bool InjectUp() const override { return true; }
  bool Send(const h4::H4Frame& frame) override;
  bool Pump(std::chrono::steady_clock::time_point deadline) override;
  void Wait(uint64_t ticks) override;

 private:
  emu::Simulation& sim_;
  std::string controller_;
  // Shared with the simulation observer, which outlives this transport.
  std::shared_ptr<RecordHandler> on_record_ = std::make_shared<RecordHandler>();
};

// Talks to a btdiag-emu instance over its inject and sniff TCP ports.
class TcpTransport : public Transport {
 public:
  // Throws Error{kIo} if either port cannot be reached.
  TcpTransport(const std::string& inject_host, uint16_t inject_port, const std::string& sniff_host,
               uint16_t sniff_port);
  ~TcpTransport() override;

  void SetHandlers(RecordHandler on_record, DisconnectHandler on_disconnect) override;
  void Detach() override;
  bool InjectUp() const override;
  bool Send(const h4::H4Frame& frame) override;
  bool Pump(std::chrono::steady_clock::time_point deadline) override;
  void Wait(uint64_t ticks) override;

 private:
  void ReadLoop();

  int inject_fd_ = -1;
  int sniff_fd_ = -1;
  int wake_pipe_[2] = {-1, -1};
  mutable std::mutex mu_;
  std::condition_variable cv_;
  uint64_t arrivals_ = 0;
  bool inject_up_ = true;
  bool sniff_up_ = true;
  RecordHandler on_record_;
  DisconnectHandler on_disconnect_;
  std::thread reader_;
};

// Parses "host:port"; throws Error{kParse}.
std::pair<std::string, uint16_t> ParseEndpoint(std::string_view text);

class Session {
 public:
  struct Result {
    bool ok = true;
    std::string output;
  };
  using OutputSink = std::function<void(const std::string&)>;

  // `live_sink` receives live-view lines and disconnect notices, possibly
  // from a transport thread.
  Session(Transport& transport, OutputSink live_sink = {});
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  Result Execute(std::string_view line);
  // Runs each line of a script, stopping at nothing; ok is false if any
  // command failed.
  Result RunScript(std::string_view text);

  void set_timeout(std::chrono::milliseconds timeout) { timeout_ = timeout; }
  bool live() const;
  bool capturing() const;
  // Sniff records seen so far (both directions).
  uint64_t records_seen() const;

 private:
  void OnRecord(const capture::SniffRecord& record);
  Result RunFrames(FrameCommand command);
  Result RunLocal(const LocalCommand& command);
  Result RunScenarioFile(const std::string& path, const std::optional<std::string>& name);

  Transport& transport_;
  OutputSink live_sink_;
  std::chrono::milliseconds timeout_{3000};

  mutable std::mutex mu_;
  std::deque<h4::H4Frame> inbox_;  // controller->host frames not yet examined
  bool live_ = false;
  struct Capture {
    std::string path;
    bool btsnoop = false;
    uint32_t start_tick = 0;
    bool started = false;
    std::vector<capture::CaptureRecord> records;
  };
  std::optional<Capture> capture_;
  uint64_t records_seen_ = 0;
};

}  // namespace btdiag::cli
