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

// Operator console for one emulated controller.
//
//   btdiag --inject 127.0.0.1:8873 --sniff 127.0.0.1:8872
//   btdiag --script setup.txt

#include <unistd.h>

#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include "CLI11.hpp"
#include "btdiag/session.h"

namespace {

std::mutex g_out_mu;
bool g_color = true;

void Print(const std::string& text, const char* color) {
  std::lock_guard<std::mutex> lock(g_out_mu);
  if (g_color && color) std::cout << color << text << "\033[0m";
  else std::cout << text;
  std::cout.flush();
}

void PrintResult(const btdiag::cli::Session::Result& r) {
  if (r.output.empty()) return;
  Print(r.output, r.ok ? nullptr : "\033[31m");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"btdiag - diagnostic console for emulated Bluetooth controllers"};
  std::string inject = "127.0.0.1:8873";
  std::string sniff = "127.0.0.1:8872";
  std::string script;
  bool no_color = false;
  app.add_option("--inject", inject, "inject stream host:port")->capture_default_str();
  app.add_option("--sniff", sniff, "sniff stream host:port")->capture_default_str();
  app.add_option("--script", script, "run commands from a file and exit");
  app.add_flag("--no-color", no_color, "plain output");
  CLI11_PARSE(app, argc, argv);
  g_color = !no_color && isatty(STDOUT_FILENO);

  try {
    auto [ihost, iport] = btdiag::cli::ParseEndpoint(inject);
    auto [shost, sport] = btdiag::cli::ParseEndpoint(sniff);
    btdiag::cli::TcpTransport transport(ihost, iport, shost, sport);
    btdiag::cli::Session session(transport, [](const std::string& line) { Print(line + "\n", "\033[36m"); });

    if (!script.empty()) {
      std::ifstream in(script);
      if (!in) {
        std::cerr << "btdiag: cannot read " << script << "\n";
        return 2;
      }
      std::stringstream text;
      text << in.rdbuf();
      auto result = session.RunScript(text.str());
      PrintResult(result);
      return result.ok ? 0 : 1;
    }

    bool tty = isatty(STDIN_FILENO);
    std::string line;
    for (;;) {
      if (tty) Print("btdiag> ", nullptr);
      if (!std::getline(std::cin, line)) break;
      if (line == "quit" || line == "exit") break;
      PrintResult(session.Execute(line));
    }
  } catch (const std::exception& e) {
    std::cerr << "btdiag: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
