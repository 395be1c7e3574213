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

// Discrete-event world holding controllers and the virtual air links between
// them. Air frames take one tick; timers fire in (tick, insertion) order.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "btdiag/controller.h"

namespace btdiag::emu {

// One H4 frame crossing a controller's host boundary.
struct TrafficEvent {
  std::string controller;
  Tick tick = 0;
  Direction direction = Direction::kHostToController;
  h4::H4Frame frame;
};

class Simulation {
 public:
  using TrafficObserver = std::function<void(const TrafficEvent&)>;
  using AirTap = std::function<void(Tick, const AirFrame&)>;

  Simulation();
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  // Names and MACs must be unique; throws Error{kInvariantViolation}.
  Controller& AddController(ControllerConfig config);
  Controller& controller(std::string_view name);
  Controller* Find(std::string_view name);
  Controller* FindByMac(const BdAddr& mac);
  std::vector<std::string> names() const;

  // Throws Error{kAlreadyLinked} if the pair is already linked (or is one
  // controller twice).
  void AttachAirLink(std::string_view a, std::string_view b);
  bool Linked(const BdAddr& a, const BdAddr& b) const;

  // Hands a frame to the controller at the current tick.
  void SubmitHostFrame(std::string_view name, const h4::H4Frame& frame);

  Tick Now() const { return now_; }
  bool Idle() const { return queue_.empty(); }
  // Runs every event due at the earliest pending tick. False when idle.
  bool Step();
  // Returns false if `max_ticks` elapse with events still pending.
  bool RunUntilIdle(Tick max_ticks = 1'000'000);
  void RunFor(Tick ticks);

  void AddTrafficObserver(TrafficObserver observer) { observers_.push_back(std::move(observer)); }
  void AddAirTap(AirTap tap) { air_taps_.push_back(std::move(tap)); }
  const std::vector<TrafficEvent>& traffic() const { return traffic_; }

 private:
  class Port;
  struct Event {
    Tick due;
    uint64_t seq;
    std::function<void()> action;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.due != b.due ? a.due > b.due : a.seq > b.seq;
    }
  };

  void Record(const std::string& name, Direction dir, const h4::H4Frame& frame);
  void Enqueue(Tick delay, std::function<void()> action);
  bool Deliver(const AirFrame& frame);

  Tick now_ = 0;
  uint64_t seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::map<std::string, std::unique_ptr<Controller>, std::less<>> controllers_;
  std::vector<std::string> order_;
  std::map<std::string, std::unique_ptr<Port>, std::less<>> ports_;
  std::set<std::pair<BdAddr, BdAddr>> links_;
  std::vector<TrafficObserver> observers_;
  std::vector<AirTap> air_taps_;
  std::vector<TrafficEvent> traffic_;
};

}  // namespace btdiag::emu
