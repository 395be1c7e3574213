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

// Line-oriented scenario files:
//
//   # comment
//   controller <name> <mac> [option...]
//   link <name> <name>
//   memory <name> <arm|bluerf> <base> <file>
//   <name>: <client command>
//
// Controller options: profile=vulnerable|patched, seed=N, unchecked-injection,
// allow=<mac>[,<mac>...] or allow=none, bpcs-check=on|off, enc-check=on|off,
// overflow=<subtype>:<dut|crash|nop>, overflow-default=<dut|crash|nop>.
// Memory file paths are relative to the scenario file.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "btdiag/controller.h"
#include "btdiag/simulation.h"

namespace btdiag::emu {

struct ScenarioCommand {
  std::string controller;
  std::string line;
  int line_no = 0;
};

struct Scenario {
  std::vector<ControllerConfig> controllers;
  std::vector<std::pair<std::string, std::string>> links;
  std::vector<ScenarioCommand> commands;
};

// Throws Error{kParse} naming the offending line.
Scenario ParseScenario(std::string_view text, const std::filesystem::path& base_dir = {});
Scenario LoadScenario(const std::filesystem::path& path);

// Adds every controller and link of `scenario` to `sim`.
void BuildTopology(const Scenario& scenario, Simulation& sim);

}  // namespace btdiag::emu
