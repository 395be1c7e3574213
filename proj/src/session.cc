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

#include "btdiag/session.h"

#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <sstream>

#include "btdiag/hci.h"
#include "btdiag/scenario.h"

namespace btdiag::cli {
namespace {

constexpr size_t kInboxLimit = 1 << 16;

int Connect(const std::string& host, uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  std::string service = std::to_string(port);
  if (int rc = getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw Error(ErrorKind::kIo, host + ":" + service + ": " + gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    close(fd);
    fd = -1;
  }
  freeaddrinfo(res);
  if (fd < 0) throw Error(ErrorKind::kIo, "cannot connect to " + host + ":" + service);
  return fd;
}

bool IsHardwareError(const h4::H4Frame& f) {
  return f.type == h4::H4Type::kHciEvent && !f.payload.empty() &&
         f.payload[0] == hci::evt::kHardwareError;
}

}  // namespace

std::pair<std::string, uint16_t> ParseEndpoint(std::string_view text) {
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error(ErrorKind::kParse, "expected host:port, got '" + std::string(text) + "'");
  }
  uint32_t port = ParseNumber(text.substr(colon + 1), /*hex_default=*/false);
  if (port == 0 || port > 0xffff) throw Error(ErrorKind::kParse, "bad port in '" + std::string(text) + "'");
  return {std::string(text.substr(0, colon)), static_cast<uint16_t>(port)};
}

// ---------------------------------------------------------------------------

LoopbackTransport::LoopbackTransport(emu::Simulation& sim, std::string controller)
    : sim_(sim), controller_(std::move(controller)) {
  sim_.controller(controller_);  // validates the name
}

LoopbackTransport::~LoopbackTransport() { *on_record_ = nullptr; }

void LoopbackTransport::SetHandlers(RecordHandler on_record, DisconnectHandler) {
  *on_record_ = std::move(on_record);
  sim_.AddTrafficObserver([handler = on_record_, name = controller_](const emu::TrafficEvent& ev) {
    if (ev.controller != name || !*handler) return;
    (*handler)({ev.direction, static_cast<uint32_t>(ev.tick), ev.frame});
  });
}

bool LoopbackTransport::Send(const h4::H4Frame& frame) {
  sim_.SubmitHostFrame(controller_, frame);
  return true;
}

bool LoopbackTransport::Pump(std::chrono::steady_clock::time_point) { return sim_.Step(); }

void LoopbackTransport::Wait(uint64_t ticks) { sim_.RunFor(ticks); }

// ---------------------------------------------------------------------------

TcpTransport::TcpTransport(const std::string& inject_host, uint16_t inject_port,
                           const std::string& sniff_host, uint16_t sniff_port) {
  inject_fd_ = Connect(inject_host, inject_port);
  try {
    sniff_fd_ = Connect(sniff_host, sniff_port);
  } catch (...) {
    close(inject_fd_);
    throw;
  }
  if (pipe(wake_pipe_) != 0) {
    close(inject_fd_);
    close(sniff_fd_);
    throw Error(ErrorKind::kIo, "pipe: " + std::string(std::strerror(errno)));
  }
}

TcpTransport::~TcpTransport() {
  Detach();
  for (int fd : {inject_fd_, sniff_fd_, wake_pipe_[0], wake_pipe_[1]}) {
    if (fd >= 0) close(fd);
  }
}

void TcpTransport::Detach() {
  if (reader_.joinable()) {
    char c = 0;
    (void)!write(wake_pipe_[1], &c, 1);
    reader_.join();
  }
}

void TcpTransport::SetHandlers(RecordHandler on_record, DisconnectHandler on_disconnect) {
  on_record_ = std::move(on_record);
  on_disconnect_ = std::move(on_disconnect);
  reader_ = std::thread([this] { ReadLoop(); });
}

bool TcpTransport::InjectUp() const {
  std::lock_guard lock(mu_);
  return inject_up_;
}

void TcpTransport::ReadLoop() {
  capture::SniffDecoder decoder;
  uint8_t buf[4096];
  auto lost = [&](bool& flag, const std::string& why) {
    {
      std::lock_guard lock(mu_);
      if (!flag) return;
      flag = false;
    }
    cv_.notify_all();
    if (on_disconnect_) on_disconnect_(why);
  };
  for (;;) {
    bool sniff_up, inject_up;
    {
      std::lock_guard lock(mu_);
      sniff_up = sniff_up_;
      inject_up = inject_up_;
    }
    pollfd fds[3] = {{wake_pipe_[0], POLLIN, 0},
                     {sniff_up ? sniff_fd_ : -1, POLLIN, 0},
                     {inject_up ? inject_fd_ : -1, POLLIN, 0}};
    if (poll(fds, 3, -1) < 0) {
      if (errno == EINTR) continue;
      return;
    }
    if (fds[0].revents) return;
    if (fds[1].revents) {
      ssize_t n = read(sniff_fd_, buf, sizeof(buf));
      if (n <= 0) {
        lost(sniff_up_, "sniff stream closed");
      } else {
        for (const auto& rec : decoder.Feed(ByteView(buf, static_cast<size_t>(n)))) {
          if (on_record_) on_record_(rec);
          {
            std::lock_guard lock(mu_);
            ++arrivals_;
          }
          cv_.notify_all();
        }
        if (decoder.error()) lost(sniff_up_, "sniff stream corrupt: " + *decoder.error());
      }
    }
    if (fds[2].revents) {
      // The server never writes on the inject stream; readability means EOF.
      ssize_t n = read(inject_fd_, buf, sizeof(buf));
      if (n <= 0) lost(inject_up_, "inject stream closed");
    }
  }
}

bool TcpTransport::Send(const h4::H4Frame& frame) {
  Bytes data = h4::EncodeFrame(frame);
  size_t off = 0;
  while (off < data.size()) {
    ssize_t n = send(inject_fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n <= 0) {
      if (n < 0 && errno == EINTR) continue;
      bool was_up;
      {
        std::lock_guard lock(mu_);
        was_up = inject_up_;
        inject_up_ = false;
      }
      if (was_up && on_disconnect_) on_disconnect_("inject stream closed");
      return false;
    }
    off += static_cast<size_t>(n);
  }
  return true;
}

bool TcpTransport::Pump(std::chrono::steady_clock::time_point deadline) {
  std::unique_lock lock(mu_);
  uint64_t seen = arrivals_;
  return cv_.wait_until(lock, deadline, [&] { return arrivals_ != seen || !sniff_up_; }) &&
         arrivals_ != seen;
}

void TcpTransport::Wait(uint64_t ticks) {
  std::this_thread::sleep_for(std::chrono::microseconds(ticks * capture::kMicrosPerTick));
}

// ---------------------------------------------------------------------------

Session::Session(Transport& transport, OutputSink live_sink)
    : transport_(transport), live_sink_(std::move(live_sink)) {
  transport_.SetHandlers([this](const capture::SniffRecord& r) { OnRecord(r); },
                         [this](const std::string& why) {
                           if (live_sink_) live_sink_("*** " + why);
                         });
}

Session::~Session() { transport_.Detach(); }

bool Session::live() const {
  std::lock_guard lock(mu_);
  return live_;
}

bool Session::capturing() const {
  std::lock_guard lock(mu_);
  return capture_.has_value();
}

uint64_t Session::records_seen() const {
  std::lock_guard lock(mu_);
  return records_seen_;
}

void Session::OnRecord(const capture::SniffRecord& record) {
  std::lock_guard lock(mu_);
  ++records_seen_;
  if (record.direction == Direction::kControllerToHost) {
    if (inbox_.size() >= kInboxLimit) inbox_.pop_front();
    inbox_.push_back(record.frame);
  }
  if (live_ && live_sink_) live_sink_(capture::RenderLive(capture::ToCaptureRecord(record)));
  if (capture_) {
    if (!capture_->started) {
      capture_->started = true;
      capture_->start_tick = record.tick;
    }
    uint32_t rel = record.tick >= capture_->start_tick ? record.tick - capture_->start_tick : 0;
    capture_->records.push_back({uint64_t{rel} * capture::kMicrosPerTick, record.direction, record.frame});
  }
}

Session::Result Session::Execute(std::string_view line) {
  try {
    std::optional<Command> command = ParseCommand(line);
    if (!command) return {};
    if (auto* local = std::get_if<LocalCommand>(&*command)) return RunLocal(*local);
    return RunFrames(std::get<FrameCommand>(std::move(*command)));
  } catch (const Error& e) {
    return {false, std::string("error: ") + e.what() + "\n"};
  }
}

Session::Result Session::RunFrames(FrameCommand command) {
  if (!transport_.InjectUp()) return {false, "error: inject stream is down\n"};
  {
    std::lock_guard lock(mu_);
    inbox_.clear();
  }
  for (const auto& frame : command.frames) {
    if (!transport_.Send(frame)) return {false, "error: inject stream is down\n"};
  }
  Result result;
  size_t next = 0;
  auto deadline = std::chrono::steady_clock::now() + timeout_;
  while (next < command.expect.size()) {
    std::optional<h4::H4Frame> frame;
    {
      std::lock_guard lock(mu_);
      if (!inbox_.empty()) {
        frame = std::move(inbox_.front());
        inbox_.pop_front();
      }
    }
    if (!frame) {
      if (!transport_.Pump(deadline)) {
        result.ok = false;
        result.output += "error: timeout waiting for " + command.expect[next].description + "\n";
        return result;
      }
      continue;
    }
    std::string text = capture::DescribeFrame(*frame, Direction::kControllerToHost);
    if (IsHardwareError(*frame)) {
      result.ok = false;
      result.output += "error: " + text + "\n";
      return result;
    }
    switch (command.expect[next].match(*frame)) {
      case MatchResult::kNoMatch:
        break;
      case MatchResult::kMatched:
        result.output += text + "\n";
        ++next;
        break;
      case MatchResult::kFailed:
        result.ok = false;
        result.output += "error: " + text + "\n";
        return result;
    }
  }
  return result;
}

Session::Result Session::RunLocal(const LocalCommand& command) {
  const auto& a = command.args;
  if (command.verb == "help") return {true, HelpText()};
  if (command.verb == "live") {
    std::lock_guard lock(mu_);
    live_ = a[0] == "on";
    return {true, std::string("live view ") + (live_ ? "on" : "off") + "\n"};
  }
  if (command.verb == "wait") {
    transport_.Wait(ParseNumber(a[0], /*hex_default=*/false));
    return {};
  }
  if (command.verb == "capture") {
    std::unique_lock lock(mu_);
    if (a[0] == "start") {
      if (capture_) return {false, "error: a capture is already active (" + capture_->path + ")\n"};
      std::string format = a.size() == 3 ? a[2] : "pcap";
      if (format != "pcap" && format != "btsnoop") return {false, "error: format must be pcap or btsnoop\n"};
      capture_.emplace();
      capture_->path = a[1];
      capture_->btsnoop = format == "btsnoop";
      return {true, "capturing to " + a[1] + " (" + format + ")\n"};
    }
    if (!capture_) return {false, "error: no capture is active\n"};
    Capture done = std::move(*capture_);
    capture_.reset();
    lock.unlock();
    std::ostringstream out;
    if (done.btsnoop) {
      size_t skipped = capture::WriteBtsnoop(done.records, done.path);
      out << "wrote " << done.records.size() - skipped << " records to " << done.path << " (skipped "
          << skipped << " non-HCI)\n";
    } else {
      capture::WritePcap(done.records, done.path);
      out << "wrote " << done.records.size() << " records to " << done.path << "\n";
    }
    return {true, out.str()};
  }
  if (command.verb == "scenario") {
    return RunScenarioFile(a[1], a.size() == 3 ? std::optional<std::string>(a[2]) : std::nullopt);
  }
  return {false, "error: unhandled command " + command.verb + "\n"};
}

Session::Result Session::RunScenarioFile(const std::string& path, const std::optional<std::string>& name) {
  emu::Scenario scenario = emu::LoadScenario(path);
  Result total;
  for (const auto& cmd : scenario.commands) {
    if (name && cmd.controller != *name) continue;
    total.output += "> " + cmd.controller + ": " + cmd.line + "\n";
    Result r = Execute(cmd.line);
    total.output += r.output;
    total.ok = total.ok && r.ok;
  }
  return total;
}

Session::Result Session::RunScript(std::string_view text) {
  Result total;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (Tokenize(line).empty()) continue;
    total.output += "> " + line + "\n";
    Result r = Execute(line);
    total.output += r.output;
    total.ok = total.ok && r.ok;
  }
  return total;
}

}  // namespace btdiag::cli
