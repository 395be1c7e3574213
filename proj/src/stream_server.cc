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

#include "btdiag/stream_server.h"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

namespace btdiag::emu {
namespace {

void SetNonBlocking(int fd) { fcntl(fd, F_SETFL, fcntl(fd, F_GETFL, 0) | O_NONBLOCK); }

[[noreturn]] void SysFail(const std::string& what) {
  throw Error(ErrorKind::kIo, what + ": " + std::strerror(errno));
}

}  // namespace

StreamServer::StreamServer(Simulation& sim, Options options) : sim_(sim), options_(std::move(options)) {
  if (pipe(wake_pipe_) != 0) SysFail("pipe");
  SetNonBlocking(wake_pipe_[0]);
  sim_.AddTrafficObserver([this](const TrafficEvent& ev) {
    Bytes record = capture::EncodeSniffRecord({ev.direction, static_cast<uint32_t>(ev.tick), ev.frame});
    for (auto& [fd, client] : clients_) {
      if (!client->sniff || client->controller != ev.controller) continue;
      if (client->outbox.size() - client->sent + record.size() > options_.max_client_backlog) {
        doomed_.push_back(fd);
        continue;
      }
      client->outbox.insert(client->outbox.end(), record.begin(), record.end());
    }
  });
}

StreamServer::~StreamServer() {
  for (auto& [fd, c] : clients_) close(fd);
  for (auto& l : listeners_) close(l.fd);
  close(wake_pipe_[0]);
  close(wake_pipe_[1]);
}

void StreamServer::Start() {
  in_addr addr{};
  if (inet_pton(AF_INET, options_.bind_address.c_str(), &addr) != 1) {
    throw Error(ErrorKind::kIo, "bad bind address " + options_.bind_address);
  }
  std::vector<std::string> names = sim_.names();
  for (size_t i = 0; i < names.size(); ++i) {
    for (bool sniff : {true, false}) {
      int fd = socket(AF_INET, SOCK_STREAM, 0);
      if (fd < 0) SysFail("socket");
      int one = 1;
      setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
      sockaddr_in sa{};
      sa.sin_family = AF_INET;
      sa.sin_addr = addr;
      uint16_t port = options_.ephemeral_ports
                          ? 0
                          : static_cast<uint16_t>(options_.base_port + 2 * i + (sniff ? 0 : 1));
      sa.sin_port = htons(port);
      if (bind(fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0) {
        close(fd);
        SysFail("bind port " + std::to_string(port));
      }
      if (listen(fd, 8) != 0) {
        close(fd);
        SysFail("listen");
      }
      socklen_t len = sizeof(sa);
      getsockname(fd, reinterpret_cast<sockaddr*>(&sa), &len);
      SetNonBlocking(fd);
      listeners_.push_back({fd, ntohs(sa.sin_port), names[i], sniff});
      Log(names[i] + (sniff ? " sniff" : " inject") + " on " + options_.bind_address + ":" +
          std::to_string(ntohs(sa.sin_port)));
    }
  }
}

const StreamServer::Listener* StreamServer::FindListener(std::string_view controller, bool sniff) const {
  for (const auto& l : listeners_) {
    if (l.controller == controller && l.sniff == sniff) return &l;
  }
  return nullptr;
}

uint16_t StreamServer::sniff_port(std::string_view controller) const {
  const Listener* l = FindListener(controller, true);
  return l ? l->port : 0;
}

uint16_t StreamServer::inject_port(std::string_view controller) const {
  const Listener* l = FindListener(controller, false);
  return l ? l->port : 0;
}

void StreamServer::Log(const std::string& text) {
  if (log_) log_(text);
}

void StreamServer::Stop() {
  stop_ = true;
  char c = 0;
  (void)!write(wake_pipe_[1], &c, 1);
}

void StreamServer::Run() {
  while (!stop_) PollOnce(-1);
}

void StreamServer::Accept(const Listener& listener) {
  int fd = accept(listener.fd, nullptr, nullptr);
  if (fd < 0) return;
  SetNonBlocking(fd);
  int one = 1;
  setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  auto client = std::make_unique<Client>();
  client->fd = fd;
  client->controller = listener.controller;
  client->sniff = listener.sniff;
  clients_.emplace(fd, std::move(client));
  Log("client attached to " + listener.controller + (listener.sniff ? " sniff" : " inject"));
}

void StreamServer::ReadInject(Client& client) {
  uint8_t buf[4096];
  for (;;) {
    ssize_t n = read(client.fd, buf, sizeof(buf));
    if (n == 0) {
      doomed_.push_back(client.fd);
      return;
    }
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno != EAGAIN && errno != EWOULDBLOCK) doomed_.push_back(client.fd);
      return;
    }
    for (const auto& frame : client.decoder.Feed(ByteView(buf, static_cast<size_t>(n)))) {
      sim_.SubmitHostFrame(client.controller, frame);
    }
    if (client.decoder.error()) {
      Log("inject stream for " + client.controller + ": unknown H4 type " +
          std::to_string(client.decoder.error()->octet) + " at offset " +
          std::to_string(client.decoder.error()->offset) + "; closing");
      doomed_.push_back(client.fd);
      return;
    }
  }
}

bool StreamServer::Flush(Client& client) {
  while (client.sent < client.outbox.size()) {
    ssize_t n = send(client.fd, client.outbox.data() + client.sent, client.outbox.size() - client.sent,
                     MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return errno == EAGAIN || errno == EWOULDBLOCK;
    }
    client.sent += static_cast<size_t>(n);
  }
  client.outbox.clear();
  client.sent = 0;
  return true;
}

void StreamServer::Drop(int fd, const std::string& why) {
  auto it = clients_.find(fd);
  if (it == clients_.end()) return;
  Log("client detached from " + it->second->controller + " (" + why + ")");
  close(fd);
  clients_.erase(it);
}

void StreamServer::PollOnce(int timeout_ms) {
  std::vector<pollfd> fds;
  fds.push_back({wake_pipe_[0], POLLIN, 0});
  for (const auto& l : listeners_) fds.push_back({l.fd, POLLIN, 0});
  for (const auto& [fd, c] : clients_) {
    short events = POLLIN;
    if (c->sniff && c->sent < c->outbox.size()) events |= POLLOUT;
    fds.push_back({fd, events, 0});
  }
  if (poll(fds.data(), fds.size(), timeout_ms) < 0) return;
  if (fds[0].revents) {
    char buf[64];
    while (read(wake_pipe_[0], buf, sizeof(buf)) > 0) {
    }
  }
  for (size_t i = 0; i < listeners_.size(); ++i) {
    if (fds[1 + i].revents & POLLIN) Accept(listeners_[i]);
  }
  bool injected = false;
  for (size_t i = 1 + listeners_.size(); i < fds.size(); ++i) {
    auto it = clients_.find(fds[i].fd);
    if (it == clients_.end() || !fds[i].revents) continue;
    Client& c = *it->second;
    if (c.sniff) {
      if (fds[i].revents & (POLLIN | POLLHUP | POLLERR)) {
        // Sniff clients only listen; any read result other than data is EOF.
        uint8_t buf[256];
        ssize_t n = read(c.fd, buf, sizeof(buf));
        if (n <= 0 && !(n < 0 && (errno == EAGAIN || errno == EINTR))) doomed_.push_back(c.fd);
      }
    } else if (fds[i].revents & (POLLIN | POLLHUP | POLLERR)) {
      ReadInject(c);
      injected = true;
    }
  }
  if (injected && !sim_.RunUntilIdle(options_.max_run_ticks)) {
    Log("simulation still busy after " + std::to_string(options_.max_run_ticks) + " ticks");
  }
  for (auto& [fd, c] : clients_) {
    if (c->sniff && !Flush(*c)) doomed_.push_back(fd);
  }
  std::sort(doomed_.begin(), doomed_.end());
  doomed_.erase(std::unique(doomed_.begin(), doomed_.end()), doomed_.end());
  for (int fd : doomed_) Drop(fd, "closed");
  doomed_.clear();
}

}  // namespace btdiag::emu
