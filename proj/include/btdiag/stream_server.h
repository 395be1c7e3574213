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

// TCP front end for a Simulation. Controller i (in the order it was added)
// gets a sniff port at base+2i and an inject port at base+2i+1.
//
// Inject clients write raw H4 frames. Sniff clients receive every frame that
// crosses that controller's host boundary, in both directions, as
// capture::SniffRecord octets. After each batch of injected frames the
// simulation runs until idle.

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "btdiag/capture.h"
#include "btdiag/simulation.h"

namespace btdiag::emu {

class StreamServer {
 public:
  struct Options {
    std::string bind_address = "127.0.0.1";
    uint16_t base_port = 8872;
    bool ephemeral_ports = false;  // let the OS choose (tests)
    Tick max_run_ticks = 1'000'000;
    size_t max_client_backlog = 16u << 20;  // octets queued per sniff client
  };

  StreamServer(Simulation& sim, Options options);
  ~StreamServer();
  StreamServer(const StreamServer&) = delete;
  StreamServer& operator=(const StreamServer&) = delete;

  // Binds listeners for every controller. Throws Error{kIo}.
  void Start();
  uint16_t sniff_port(std::string_view controller) const;
  uint16_t inject_port(std::string_view controller) const;

  // Serves until Stop(). Only the serving thread touches the simulation.
  void Run();
  // Thread safe.
  void Stop();
  // One poll round; returns after `timeout_ms` or after handling activity.
  void PollOnce(int timeout_ms);

  void set_log(std::function<void(const std::string&)> log) { log_ = std::move(log); }

 private:
  struct Listener {
    int fd = -1;
    uint16_t port = 0;
    std::string controller;
    bool sniff = false;
  };
  struct Client {
    int fd = -1;
    std::string controller;
    bool sniff = false;
    h4::StreamDecoder decoder;
    Bytes outbox;
    size_t sent = 0;
  };

  void Accept(const Listener& listener);
  void ReadInject(Client& client);
  bool Flush(Client& client);
  void Drop(int fd, const std::string& why);
  void Log(const std::string& text);
  const Listener* FindListener(std::string_view controller, bool sniff) const;

  Simulation& sim_;
  Options options_;
  std::vector<Listener> listeners_;
  std::map<int, std::unique_ptr<Client>> clients_;
  std::vector<int> doomed_;
  int wake_pipe_[2] = {-1, -1};
  std::atomic<bool> stop_{false};
  std::function<void(const std::string&)> log_;
};

}  // namespace btdiag::emu
