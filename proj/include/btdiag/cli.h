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

// Operator command vocabulary. Turning a command line into frames is kept
// separate from any transport so the emulator's scenario runner and the
// interactive client share one implementation.

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "btdiag/common.h"
#include "btdiag/h4.h"

namespace btdiag::cli {

enum class MatchResult { kNoMatch, kMatched, kFailed };

// A controller->host frame the command waits for. kFailed means the frame
// answers the command with an error status; waiting stops there.
struct Expectation {
  std::string description;
  std::function<MatchResult(const h4::H4Frame&)> match;
};

struct FrameCommand {
  std::vector<h4::H4Frame> frames;
  std::vector<Expectation> expect;  // all must match, in order
};

// Commands handled by the session itself rather than turned into frames.
struct LocalCommand {
  std::string verb;
  std::vector<std::string> args;
};

using Command = std::variant<FrameCommand, LocalCommand>;

// Splits on whitespace and strips '#' comments. Empty for blank lines.
std::vector<std::string> Tokenize(std::string_view line);

// Throws Error{kParse} with a usage hint for malformed commands.
std::optional<Command> ParseCommand(std::string_view line);

// Multi-line help text covering every verb.
std::string HelpText();

// Numbers accept decimal or hex with a 0x prefix; bare hex digits also parse
// as hex when `hex_default` is set.
uint32_t ParseNumber(std::string_view text, bool hex_default = true);

}  // namespace btdiag::cli
