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

#include "btdiag/scenario.h"

#include <fstream>
#include <sstream>

#include "btdiag/cli.h"

namespace btdiag::emu {
namespace {

[[noreturn]] void Fail(int line_no, const std::string& what) {
  throw Error(ErrorKind::kParse, "scenario line " + std::to_string(line_no) + ": " + what);
}

HandlerAction ParseAction(std::string_view text, int line_no) {
  if (text == "dut") return HandlerAction::kDutMode;
  if (text == "crash") return HandlerAction::kCrash;
  if (text == "nop") return HandlerAction::kNop;
  Fail(line_no, "unknown handler action '" + std::string(text) + "'");
}

bool OnOff(std::string_view text, int line_no) {
  if (text == "on") return true;
  if (text == "off") return false;
  Fail(line_no, "expected on|off, got '" + std::string(text) + "'");
}

void ApplyOption(ControllerConfig& config, const std::string& option, int line_no) {
  auto eq = option.find('=');
  std::string key = option.substr(0, eq);
  std::string value = eq == std::string::npos ? std::string() : option.substr(eq + 1);
  SecurityProfile& p = config.profile;
  if (key == "unchecked-injection" && eq == std::string::npos) {
    config.unchecked_lmp_injection = true;
  } else if (key == "profile") {
    auto keep_allow = p.firewall_allowlist;
    if (value == "vulnerable") p = SecurityProfile::Vulnerable();
    else if (value == "patched") p = SecurityProfile::Patched();
    else Fail(line_no, "unknown profile '" + value + "'");
    p.firewall_allowlist = keep_allow;
  } else if (key == "seed") {
    config.seed = cli::ParseNumber(value, /*hex_default=*/false);
  } else if (key == "allow") {
    p.firewall_allowlist.emplace();
    if (value != "none") {
      std::istringstream macs(value);
      for (std::string mac; std::getline(macs, mac, ',');) p.firewall_allowlist->insert(BdAddr::FromString(mac));
    }
  } else if (key == "bpcs-check") {
    p.bpcs_bounds_check = OnOff(value, line_no);
  } else if (key == "enc-check") {
    p.encryption_order_check = OnOff(value, line_no);
  } else if (key == "overflow") {
    auto colon = value.find(':');
    if (colon == std::string::npos) Fail(line_no, "overflow needs <subtype>:<action>");
    uint32_t subtype = cli::ParseNumber(value.substr(0, colon));
    if (subtype <= ll::kMaxBpcsSubtype || subtype > 0xff) Fail(line_no, "overflow subtype must be 0x06..0xff");
    p.bpcs_overflow_map[static_cast<uint8_t>(subtype)] = ParseAction(value.substr(colon + 1), line_no);
  } else if (key == "overflow-default") {
    p.bpcs_overflow_default = ParseAction(value, line_no);
  } else {
    Fail(line_no, "unknown controller option '" + option + "'");
  }
}

}  // namespace

Scenario ParseScenario(std::string_view text, const std::filesystem::path& base_dir) {
  Scenario s;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  auto find = [&](const std::string& name) -> ControllerConfig* {
    for (auto& c : s.controllers) {
      if (c.name == name) return &c;
    }
    return nullptr;
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<std::string> t = cli::Tokenize(line);
    if (t.empty()) continue;
    try {
      if (t[0].size() > 1 && t[0].back() == ':') {
        std::string name = t[0].substr(0, t[0].size() - 1);
        if (!find(name)) Fail(line_no, "unknown controller '" + name + "'");
        auto colon = line.find(':');
        std::string command = line.substr(colon + 1);
        if (cli::Tokenize(command).empty()) Fail(line_no, "empty command");
        command.erase(0, command.find_first_not_of(" \t"));
        command.erase(command.find_last_not_of(" \t\r") + 1);
        s.commands.push_back({name, command, line_no});
      } else if (t[0] == "controller") {
        if (t.size() < 3) Fail(line_no, "usage: controller <name> <mac> [option...]");
        if (find(t[1])) Fail(line_no, "duplicate controller '" + t[1] + "'");
        ControllerConfig config;
        config.name = t[1];
        config.mac = BdAddr::FromString(t[2]);
        for (size_t i = 3; i < t.size(); ++i) ApplyOption(config, t[i], line_no);
        s.controllers.push_back(std::move(config));
      } else if (t[0] == "link") {
        if (t.size() != 3) Fail(line_no, "usage: link <name> <name>");
        if (!find(t[1]) || !find(t[2])) Fail(line_no, "link names an unknown controller");
        s.links.emplace_back(t[1], t[2]);
      } else if (t[0] == "memory") {
        if (t.size() != 5) Fail(line_no, "usage: memory <name> <arm|bluerf> <base> <file>");
        ControllerConfig* c = find(t[1]);
        if (!c) Fail(line_no, "unknown controller '" + t[1] + "'");
        if (t[2] != "arm" && t[2] != "bluerf") Fail(line_no, "memory kind must be arm or bluerf");
        std::filesystem::path file = t[4];
        if (file.is_relative()) file = base_dir / file;
        c->memory_loads.push_back(
            {t[2] == "arm" ? MemKind::kArm : MemKind::kBlueRf, cli::ParseNumber(t[3]), file.string()});
      } else {
        Fail(line_no, "unrecognised line '" + line + "'");
      }
    } catch (const Error& e) {
      if (std::string_view(e.what()).starts_with("scenario line")) throw;
      Fail(line_no, e.what());
    }
  }
  return s;
}

Scenario LoadScenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read scenario " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  return ParseScenario(text.str(), path.parent_path());
}

void BuildTopology(const Scenario& scenario, Simulation& sim) {
  for (const auto& config : scenario.controllers) sim.AddController(config);
  for (const auto& [a, b] : scenario.links) sim.AttachAirLink(a, b);
}

}  // namespace btdiag::emu
