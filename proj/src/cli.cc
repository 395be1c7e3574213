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

#include "btdiag/cli.h"

#include <charconv>
#include <map>
#include <sstream>

#include "btdiag/diag.h"
#include "btdiag/hci.h"

namespace btdiag::cli {
namespace {

using diag::DiagCode;

[[noreturn]] void Usage(std::string_view usage) {
  throw Error(ErrorKind::kParse, "usage: " + std::string(usage));
}

void Arity(const std::vector<std::string>& t, size_t min, size_t max, std::string_view usage) {
  if (t.size() < min + 1 || t.size() > max + 1) Usage(usage);
}

BdAddr Mac(const std::string& text, std::string_view usage) {
  try {
    return BdAddr::FromString(text);
  } catch (const Error&) {
    Usage(usage);
  }
}

h4::H4Frame CommandFrame(uint16_t opcode, Bytes params = {}) {
  return h4::MakeCommandFrame({opcode, std::move(params)});
}

Bytes MacBytes(const BdAddr& mac) { return Bytes(mac.octets.begin(), mac.octets.end()); }

MatchResult FromStatus(std::optional<uint8_t> status) {
  return status && *status != hci::status::kSuccess ? MatchResult::kFailed : MatchResult::kMatched;
}

std::optional<h4::HciEvent> AsEvent(const h4::H4Frame& f) {
  if (f.type != h4::H4Type::kHciEvent) return std::nullopt;
  try {
    return h4::ParseEvent(f);
  } catch (const Error&) {
    return std::nullopt;
  }
}

Expectation ExpectCommandResult(uint16_t opcode) {
  std::string name(hci::CommandName(opcode));
  return {"completion of " + (name.empty() ? ToHex(Bytes{uint8_t(opcode >> 8), uint8_t(opcode)}) : name),
          [opcode](const h4::H4Frame& f) {
            auto e = AsEvent(f);
            if (!e || hci::AnsweredOpcode(*e) != opcode) return MatchResult::kNoMatch;
            return FromStatus(hci::EventStatus(*e));
          }};
}

// Events that carry a peer address at `offset` of their parameters.
Expectation ExpectPeerEvent(std::string description, uint8_t code, std::optional<uint8_t> subevent,
                            size_t offset, const BdAddr& peer) {
  return {std::move(description), [=](const h4::H4Frame& f) {
            auto e = AsEvent(f);
            if (!e || e->event_code != code) return MatchResult::kNoMatch;
            if (subevent && (e->params.empty() || e->params[0] != *subevent)) return MatchResult::kNoMatch;
            if (e->params.size() < offset + 6 ||
                BdAddr::FromLittleEndian(ByteView(e->params).subspan(offset, 6)) != peer) {
              return MatchResult::kNoMatch;
            }
            return FromStatus(hci::EventStatus(*e));
          }};
}

Expectation ExpectHandleEvent(std::string description, uint8_t code, uint16_t handle) {
  return {std::move(description), [=](const h4::H4Frame& f) {
            auto e = AsEvent(f);
            if (!e || e->event_code != code || e->params.size() < 3 || GetLe16(e->params, 1) != handle) {
              return MatchResult::kNoMatch;
            }
            return FromStatus(hci::EventStatus(*e));
          }};
}

Expectation ExpectDiag(DiagCode code) {
  return {std::string(diag::DiagCodeName(code)), [code](const h4::H4Frame& f) {
            if (f.type != h4::H4Type::kDiag || f.payload.empty() || f.payload[0] != static_cast<uint8_t>(code)) {
              return MatchResult::kNoMatch;
            }
            diag::DiagMessage msg;
            try {
              msg = diag::FromFrame(f);
            } catch (const Error&) {
              return MatchResult::kFailed;
            }
            std::optional<uint8_t> status;
            if (auto* p = std::get_if<diag::PeekResponse>(&msg.body)) status = p->status;
            if (auto* p = std::get_if<diag::PokeResponse>(&msg.body)) status = p->status;
            if (auto* p = std::get_if<diag::TestCompleted>(&msg.body)) status = p->status;
            return FromStatus(status);
          }};
}

FrameCommand Diag(const diag::DiagMessage& msg, std::vector<Expectation> expect = {}) {
  return {{diag::ToFrame(msg)}, std::move(expect)};
}

FrameCommand Hci(uint16_t opcode, Bytes params = {}) {
  return {{CommandFrame(opcode, std::move(params))}, {ExpectCommandResult(opcode)}};
}

diag::MemAccessType Access(const std::string& text, std::string_view usage) {
  if (text == "arm") return diag::MemAccessType::kArm;
  if (text == "bluerf") return diag::MemAccessType::kBlueRf;
  Usage(usage);
}

uint8_t Octet(const std::string& text, std::string_view usage) {
  uint32_t v = ParseNumber(text);
  if (v > 0xff) Usage(usage);
  return static_cast<uint8_t>(v);
}

uint16_t Handle(const std::string& text, std::string_view usage) {
  uint32_t v = ParseNumber(text);
  if (v > 0x0eff) Usage(usage);
  return static_cast<uint16_t>(v);
}

Bytes HandleBytes(uint16_t handle) {
  Bytes b;
  PutLe16(b, handle);
  return b;
}

Bytes HexArg(const std::vector<std::string>& t, size_t from) {
  std::string joined;
  for (size_t i = from; i < t.size(); ++i) joined += t[i];
  return ParseHex(joined);
}

constexpr std::string_view kPeekUsage = "peek <arm|bluerf> <addr>";
constexpr std::string_view kPokeUsage = "poke <arm|bluerf> <addr> <value>";
constexpr std::string_view kStatsUsage = "stats <br|edr|sco|esco|aux|conn> [reset]";
constexpr std::string_view kTestUsage =
    "test [scenario=N] [hop=N] [tx=CH] [rx=CH] [power=N] [ptype=N] [len=N] [count=N]";
constexpr std::string_view kFirewallUsage = "firewall add|del <mac> | firewall show | firewall off";

FrameCommand Stats(const std::vector<std::string>& t) {
  Arity(t, 1, 2, kStatsUsage);
  static const std::map<std::string, DiagCode, std::less<>> kinds = {
      {"br", DiagCode::kGetBrAclStats},   {"edr", DiagCode::kGetEdrAclStats},
      {"sco", DiagCode::kGetScoStats},    {"esco", DiagCode::kGetEscoStats},
      {"aux", DiagCode::kGetAuxStats},    {"conn", DiagCode::kGetConnectionStats}};
  auto it = kinds.find(t[1]);
  if (it == kinds.end()) Usage(kStatsUsage);
  DiagCode request = it->second;
  if (t.size() == 3) {
    if (t[2] != "reset" || request != DiagCode::kGetBrAclStats) Usage(kStatsUsage);
    request = DiagCode::kResetBrAclStats;
  }
  DiagCode response = request == DiagCode::kGetConnectionStats ? DiagCode::kCpuLoadResponse
                                                               : diag::StatsResponseFor(request);
  return Diag(diag::MakeStatsRequest(request), {ExpectDiag(response)});
}

FrameCommand Test(const std::vector<std::string>& t) {
  diag::TestParams p;
  p.scenario = diag::kTestScenarioAclLoopback;
  p.packet_type = 0x04;  // DH1
  p.payload_length = 27;
  p.packet_count = 100;
  for (size_t i = 1; i < t.size(); ++i) {
    auto eq = t[i].find('=');
    if (eq == std::string::npos) Usage(kTestUsage);
    std::string key = t[i].substr(0, eq);
    uint32_t v = ParseNumber(t[i].substr(eq + 1), /*hex_default=*/false);
    auto octet = [&] {
      if (v > 0xff) Usage(kTestUsage);
      return static_cast<uint8_t>(v);
    };
    if (key == "scenario") p.scenario = octet();
    else if (key == "hop") p.hopping_mode = octet();
    else if (key == "tx") p.tx_frequency = octet();
    else if (key == "rx") p.rx_frequency = octet();
    else if (key == "power") p.power_level = octet();
    else if (key == "ptype") p.packet_type = octet();
    else if (key == "len" && v <= 0xffff) p.payload_length = static_cast<uint16_t>(v);
    else if (key == "count" && v <= 0xffff) p.packet_count = static_cast<uint16_t>(v);
    else Usage(kTestUsage);
  }
  return Diag(diag::MakeRunTest(p), {ExpectDiag(DiagCode::kTestCompleted)});
}

FrameCommand Firewall(const std::vector<std::string>& t) {
  Arity(t, 1, 2, kFirewallUsage);
  const std::string& op = t[1];
  Bytes params;
  if ((op == "add" || op == "del") && t.size() == 3) {
    params.push_back(op == "add" ? 1 : 2);
    Bytes mac = MacBytes(Mac(t[2], kFirewallUsage));
    params.insert(params.end(), mac.begin(), mac.end());
  } else if (op == "show" && t.size() == 2) {
    params.push_back(0);
  } else if (op == "off" && t.size() == 2) {
    params.push_back(3);
  } else {
    Usage(kFirewallUsage);
  }
  return Hci(hci::op::kFirewallControl, std::move(params));
}

}  // namespace

std::vector<std::string> Tokenize(std::string_view line) {
  if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  std::istringstream in{std::string(line)};
  std::vector<std::string> tokens;
  for (std::string tok; in >> tok;) tokens.push_back(tok);
  return tokens;
}

uint32_t ParseNumber(std::string_view text, bool hex_default) {
  bool hex = hex_default;
  if (text.starts_with("0x") || text.starts_with("0X")) {
    text.remove_prefix(2);
    hex = true;
  }
  uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v, hex ? 16 : 10);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorKind::kParse, "bad number '" + std::string(text) + "'");
  }
  return v;
}

std::optional<Command> ParseCommand(std::string_view line) {
  std::vector<std::string> t = Tokenize(line);
  if (t.empty()) return std::nullopt;
  const std::string& verb = t[0];
  try {
    if (verb == "help" || verb == "live" || verb == "capture" || verb == "scenario" || verb == "wait") {
      if (verb == "live") Arity(t, 1, 1, "live on|off");
      if (verb == "capture" &&
          !((t.size() >= 3 && t.size() <= 4 && t[1] == "start") || (t.size() == 2 && t[1] == "stop"))) {
        Usage("capture start <path> [pcap|btsnoop] | capture stop");
      }
      if (verb == "scenario" && !(t.size() >= 3 && t.size() <= 4 && t[1] == "run")) {
        Usage("scenario run <file> [controller]");
      }
      if (verb == "wait") {
        Arity(t, 1, 1, "wait <ticks>");
        ParseNumber(t[1], false);
      }
      return LocalCommand{verb, std::vector<std::string>(t.begin() + 1, t.end())};
    }
    if (verb == "diag") {
      Arity(t, 1, 1, "diag on|off");
      if (t[1] != "on" && t[1] != "off") Usage("diag on|off");
      return Diag(diag::MakeToggle(t[1] == "on"));
    }
    if (verb == "peek") {
      Arity(t, 2, 2, kPeekUsage);
      return Diag(diag::MakePeek(Access(t[1], kPeekUsage), ParseNumber(t[2])),
                  {ExpectDiag(DiagCode::kPeekResponse)});
    }
    if (verb == "poke") {
      Arity(t, 3, 3, kPokeUsage);
      return Diag(diag::MakePoke(Access(t[1], kPokeUsage), ParseNumber(t[2]), Octet(t[3], kPokeUsage)),
                  {ExpectDiag(DiagCode::kPokeResponse)});
    }
    if (verb == "dump") {
      Arity(t, 1, 1, "dump <addr>");
      return Diag(diag::MakeHexdump(ParseNumber(t[1])), {ExpectDiag(DiagCode::kHexdumpResponse)});
    }
    if (verb == "stats") return Stats(t);
    if (verb == "test") return Test(t);
    if (verb == "connect" || verb == "leconnect") {
      std::string usage = verb + " <mac>";
      Arity(t, 1, 1, usage);
      BdAddr peer = Mac(t[1], usage);
      if (verb == "connect") {
        Bytes p = MacBytes(peer);
        PutLe16(p, 0xcc18);  // DM1..DH5
        p.insert(p.end(), {0x02, 0x00, 0x00, 0x00, 0x01});
        return FrameCommand{{CommandFrame(hci::op::kCreateConnection, std::move(p))},
                            {ExpectCommandResult(hci::op::kCreateConnection),
                             ExpectPeerEvent("Connection_Complete", hci::evt::kConnectionComplete, std::nullopt,
                                             3, peer)}};
      }
      Bytes p;
      PutLe16(p, 0x0060);  // scan interval
      PutLe16(p, 0x0030);  // scan window
      p.push_back(0x00);   // no filter accept list
      p.push_back(0x00);   // public peer address
      Bytes mac = MacBytes(peer);
      p.insert(p.end(), mac.begin(), mac.end());
      p.push_back(0x00);  // own public address
      for (uint16_t v : {0x0018, 0x0028, 0x0000, 0x0048, 0x0000, 0x0000}) PutLe16(p, v);
      return FrameCommand{{CommandFrame(hci::op::kLeCreateConnection, std::move(p))},
                          {ExpectCommandResult(hci::op::kLeCreateConnection),
                           ExpectPeerEvent("LE_Connection_Complete", hci::evt::kLeMeta,
                                           hci::evt::kLeConnectionCompleteSubevent, 6, peer)}};
    }
    if (verb == "disconnect") {
      constexpr std::string_view usage = "disconnect <handle> [reason]";
      Arity(t, 1, 2, usage);
      uint16_t handle = Handle(t[1], usage);
      Bytes p = HandleBytes(handle);
      p.push_back(t.size() == 3 ? Octet(t[2], usage) : hci::status::kRemoteUserTerminated);
      return FrameCommand{{CommandFrame(hci::op::kDisconnect, std::move(p))},
                          {ExpectCommandResult(hci::op::kDisconnect),
                           ExpectHandleEvent("Disconnection_Complete", hci::evt::kDisconnectionComplete, handle)}};
    }
    if (verb == "auth") {
      Arity(t, 1, 1, "auth <handle>");
      return FrameCommand{
          {CommandFrame(hci::op::kAuthenticationRequested, HandleBytes(Handle(t[1], "auth <handle>")))},
          {ExpectCommandResult(hci::op::kAuthenticationRequested),
           {"User_Confirmation_Request", [](const h4::H4Frame& f) {
              auto e = AsEvent(f);
              return e && e->event_code == hci::evt::kUserConfirmationRequest ? MatchResult::kMatched
                                                                               : MatchResult::kNoMatch;
            }}}};
    }
    if (verb == "confirm") {
      Arity(t, 1, 1, "confirm <mac>");
      return Hci(hci::op::kUserConfirmationRequestReply, MacBytes(Mac(t[1], "confirm <mac>")));
    }
    if (verb == "encrypt") {
      Arity(t, 1, 1, "encrypt <handle>");
      uint16_t handle = Handle(t[1], "encrypt <handle>");
      Bytes p = HandleBytes(handle);
      p.push_back(0x01);
      return FrameCommand{{CommandFrame(hci::op::kSetConnectionEncryption, std::move(p))},
                          {ExpectCommandResult(hci::op::kSetConnectionEncryption),
                           ExpectHandleEvent("Encryption_Change", hci::evt::kEncryptionChange, handle)}};
    }
    if (verb == "sendlmp") {
      constexpr std::string_view usage = "sendlmp <handle> <hex>";
      if (t.size() < 3) Usage(usage);
      Bytes p = HandleBytes(Handle(t[1], usage));
      Bytes pdu = HexArg(t, 2);
      if (pdu.empty() || pdu.size() > 253) Usage(usage);
      p.insert(p.end(), pdu.begin(), pdu.end());
      return Hci(hci::op::kSendLmpPdu, std::move(p));
    }
    if (verb == "firewall") return Firewall(t);
    if (verb == "acl") {
      constexpr std::string_view usage = "acl <handle> <hex>";
      if (t.size() < 3) Usage(usage);
      uint16_t handle = Handle(t[1], usage);
      return FrameCommand{{h4::MakeAclFrame(handle, HexArg(t, 2))},
                          {ExpectHandleEvent("Number_Of_Completed_Packets",
                                             hci::evt::kNumberOfCompletedPackets, handle)}};
    }
    if (verb == "version") {
      Arity(t, 0, 0, "version");
      return Hci(hci::op::kReadLocalVersion);
    }
    if (verb == "bdaddr") {
      Arity(t, 0, 0, "bdaddr");
      return Hci(hci::op::kReadBdAddr);
    }
    if (verb == "reset") {
      Arity(t, 0, 0, "reset");
      return Hci(hci::op::kReset);
    }
    if (verb == "dut") {
      Arity(t, 0, 0, "dut");
      return Hci(hci::op::kEnableDeviceUnderTestMode);
    }
    if (verb == "readram") {
      constexpr std::string_view usage = "readram <addr> <len>";
      Arity(t, 2, 2, usage);
      Bytes p;
      PutLe32(p, ParseNumber(t[1]));
      p.push_back(Octet(t[2], usage));
      return Hci(hci::op::kReadRam, std::move(p));
    }
    if (verb == "writeram") {
      constexpr std::string_view usage = "writeram <addr> <hex>";
      if (t.size() < 3) Usage(usage);
      Bytes p;
      PutLe32(p, ParseNumber(t[1]));
      Bytes data = HexArg(t, 2);
      if (data.empty() || data.size() > 251) Usage(usage);
      p.insert(p.end(), data.begin(), data.end());
      return Hci(hci::op::kWriteRam, std::move(p));
    }
    if (verb == "rfpeek" || verb == "rfpoke") {
      bool poke = verb == "rfpoke";
      std::string_view usage = poke ? "rfpoke <addr> <value>" : "rfpeek <addr>";
      Arity(t, poke ? 2 : 1, poke ? 2 : 1, usage);
      Bytes p{static_cast<uint8_t>(poke ? 1 : 0)};
      PutLe32(p, ParseNumber(t[1]));
      if (poke) p.push_back(Octet(t[2], usage));
      return Hci(hci::op::kSuperDuperPeekPoke, std::move(p));
    }
    if (verb == "raw") {
      if (t.size() < 2) Usage("raw <h4 hex>");
      Bytes octets = HexArg(t, 1);
      h4::DecodeResult r = h4::DecodeStream(octets);
      if (r.error || r.consumed != octets.size() || r.frames.empty()) {
        throw Error(ErrorKind::kParse, "raw: octets are not a whole number of H4 frames");
      }
      return FrameCommand{std::move(r.frames), {}};
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kParse && std::string_view(e.what()).starts_with("usage")) throw;
    throw Error(ErrorKind::kParse, verb + ": " + e.what());
  }
  throw Error(ErrorKind::kParse, "unknown command '" + verb + "' (try 'help')");
}

std::string HelpText() {
  return R"(Numbers are hex (optional 0x) except test parameters and wait, which are decimal.
  diag on|off                         toggle LMP/LCP logging
  peek <arm|bluerf> <addr>            read one octet
  poke <arm|bluerf> <addr> <value>    write one octet
  dump <addr>                         32-octet ARM hexdump
  stats <br|edr|sco|esco|aux|conn> [reset]
  test [scenario=N] [hop=N] [tx=CH] [rx=CH] [power=N] [ptype=N] [len=N] [count=N]
  connect <mac> | leconnect <mac>     page a peer (Classic / LE)
  disconnect <handle> [reason]
  auth <handle> | confirm <mac> | encrypt <handle>
  sendlmp <handle> <hex>              inject an LMP PDU (vendor 0xfc58)
  acl <handle> <hex>                  send ACL data
  firewall add|del <mac> | firewall show | firewall off
  readram <addr> <len> | writeram <addr> <hex>
  rfpeek <addr> | rfpoke <addr> <value>
  version | bdaddr | reset | dut
  raw <h4 hex>                        send raw H4 octets
  live on|off                         print sniffed traffic
  capture start <path> [pcap|btsnoop] | capture stop
  scenario run <file> [controller]
  wait <ticks>
  help
)";
}

}  // namespace btdiag::cli
