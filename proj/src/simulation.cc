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

#include "btdiag/simulation.h"

#include <algorithm>

namespace btdiag::emu {

class Simulation::Port : public AirPort {
 public:
  Port(Simulation& sim, BdAddr mac) : sim_(sim), mac_(mac) {}

  Tick Now() const override { return sim_.now_; }
  bool Transmit(const AirFrame& frame) override { return sim_.Deliver(frame); }
  void Schedule(Tick delay, std::function<void()> callback) override {
    sim_.Enqueue(delay, std::move(callback));
  }
  std::optional<BdAddr> FirstLinkedPeer() const override {
    for (const auto& [a, b] : sim_.links_) {
      if (a == mac_) return b;
      if (b == mac_) return a;
    }
    return std::nullopt;
  }

 private:
  Simulation& sim_;
  BdAddr mac_;
};

Simulation::Simulation() = default;
Simulation::~Simulation() = default;

Controller& Simulation::AddController(ControllerConfig config) {
  if (controllers_.contains(config.name)) {
    throw Error(ErrorKind::kInvariantViolation, "duplicate controller name " + config.name);
  }
  if (FindByMac(config.mac)) {
    throw Error(ErrorKind::kInvariantViolation, "duplicate controller address " + config.mac.ToString());
  }
  std::string name = config.name;
  auto ctrl = std::make_unique<Controller>(std::move(config));
  auto port = std::make_unique<Port>(*this, ctrl->mac());
  ctrl->Attach(port.get());
  ctrl->SetHostSink([this, name](const h4::H4Frame& f) { Record(name, Direction::kControllerToHost, f); });
  Controller& ref = *ctrl;
  controllers_.emplace(name, std::move(ctrl));
  ports_.emplace(name, std::move(port));
  order_.push_back(name);
  return ref;
}

Controller& Simulation::controller(std::string_view name) {
  Controller* c = Find(name);
  if (!c) throw Error(ErrorKind::kInvariantViolation, "no controller named " + std::string(name));
  return *c;
}

Controller* Simulation::Find(std::string_view name) {
  auto it = controllers_.find(name);
  return it == controllers_.end() ? nullptr : it->second.get();
}

Controller* Simulation::FindByMac(const BdAddr& mac) {
  for (auto& [n, c] : controllers_) {
    if (c->mac() == mac) return c.get();
  }
  return nullptr;
}

std::vector<std::string> Simulation::names() const { return order_; }

void Simulation::AttachAirLink(std::string_view a, std::string_view b) {
  BdAddr ma = controller(a).mac();
  BdAddr mb = controller(b).mac();
  if (ma == mb) throw Error(ErrorKind::kAlreadyLinked, "cannot link a controller to itself");
  auto key = std::minmax(ma, mb);
  if (!links_.emplace(key.first, key.second).second) {
    throw Error(ErrorKind::kAlreadyLinked,
                std::string(a) + " and " + std::string(b) + " are already linked");
  }
}

bool Simulation::Linked(const BdAddr& a, const BdAddr& b) const {
  auto key = std::minmax(a, b);
  return links_.contains({key.first, key.second});
}

void Simulation::Record(const std::string& name, Direction dir, const h4::H4Frame& frame) {
  TrafficEvent ev{name, now_, dir, frame};
  for (const auto& obs : observers_) obs(ev);
  traffic_.push_back(std::move(ev));
}

void Simulation::SubmitHostFrame(std::string_view name, const h4::H4Frame& frame) {
  Controller& c = controller(name);
  Record(std::string(name), Direction::kHostToController, frame);
  c.HandleHostFrame(frame);
}

void Simulation::Enqueue(Tick delay, std::function<void()> action) {
  queue_.push(Event{now_ + delay, seq_++, std::move(action)});
}

bool Simulation::Deliver(const AirFrame& frame) {
  if (!Linked(frame.from, frame.to)) return false;
  for (const auto& tap : air_taps_) tap(now_, frame);
  Enqueue(1, [this, frame] {
    if (Controller* dst = FindByMac(frame.to)) dst->HandleAirFrame(frame);
  });
  return true;
}

bool Simulation::Step() {
  if (queue_.empty()) return false;
  Tick due = queue_.top().due;
  now_ = std::max(now_, due);
  while (!queue_.empty() && queue_.top().due == due) {
    Event ev = queue_.top();
    queue_.pop();
    ev.action();
  }
  return true;
}

bool Simulation::RunUntilIdle(Tick max_ticks) {
  Tick limit = now_ + max_ticks;
  while (!queue_.empty()) {
    if (queue_.top().due > limit) return false;
    Step();
  }
  return true;
}

void Simulation::RunFor(Tick ticks) {
  Tick limit = now_ + ticks;
  while (!queue_.empty() && queue_.top().due <= limit) Step();
  now_ = limit;
}

}  // namespace btdiag::emu
