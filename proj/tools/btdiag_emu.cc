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

// Emulated controller daemon.
//
//   btdiag-emu --scenario scenarios/two_devices.txt
//   btdiag-emu --scenario scenarios/cve_2018_19860.txt --batch
//
// Builds the scenario topology, runs its command lines, then serves each
// controller's sniff/inject ports until interrupted. With --batch the
// traffic log is printed instead and the process exits.

#include <csignal>
#include <iostream>

#include "CLI11.hpp"
#include "btdiag/scenario.h"
#include "btdiag/session.h"
#include "btdiag/stream_server.h"

namespace {

btdiag::emu::StreamServer* g_server = nullptr;

void OnSignal(int) {
  if (g_server) g_server->Stop();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace btdiag;
  CLI::App app{"btdiag-emu - emulated Broadcom-style Bluetooth controllers"};
  std::string scenario_path;
  std::string bind = "127.0.0.1";
  uint16_t base_port = 8872;
  bool batch = false;
  app.add_option("--scenario", scenario_path, "scenario file")->required()->check(CLI::ExistingFile);
  app.add_option("--bind", bind, "listen address")->capture_default_str();
  app.add_option("--base-port", base_port, "sniff port of the first controller")->capture_default_str();
  app.add_flag("--batch", batch, "run the scenario, print its traffic and exit");
  CLI11_PARSE(app, argc, argv);

  try {
    emu::Scenario scenario = emu::LoadScenario(scenario_path);
    emu::Simulation sim;
    emu::BuildTopology(scenario, sim);

    bool ok = true;
    for (const auto& step : scenario.commands) {
      cli::LoopbackTransport transport(sim, step.controller);
      cli::Session session(transport);
      auto result = session.Execute(step.line);
      sim.RunUntilIdle();
      std::cout << "> " << step.controller << ": " << step.line << "\n" << result.output;
      ok = ok && result.ok;
    }

    if (batch) {
      for (const auto& ev : sim.traffic()) {
        std::cout << ev.controller << " "
                  << capture::RenderLive(capture::ToCaptureRecord({ev.direction, static_cast<uint32_t>(ev.tick), ev.frame}))
                  << "\n";
      }
      return ok ? 0 : 1;
    }

    emu::StreamServer server(sim, {.bind_address = bind, .base_port = base_port});
    server.set_log([](const std::string& text) { std::cerr << "btdiag-emu: " << text << "\n"; });
    server.Start();
    g_server = &server;
    std::signal(SIGINT, OnSignal);
    std::signal(SIGTERM, OnSignal);
    server.Run();
    g_server = nullptr;
  } catch (const std::exception& e) {
    std::cerr << "btdiag-emu: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
