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

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit status
// if any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <utility>

#include "btdiag/controller.h"
#include "btdiag/hci.h"
#include "fixtures.h"
#include "test_support.h"

namespace btdiag {
namespace {

using testing::Gen;
using testing::Hex;
using testing::World;

// Records the first failed requirement of a criterion.
class Check {
 public:
  bool Require(bool condition, const std::string& what) {
    if (!condition && ok_) {
      ok_ = false;
      detail_ = what;
    }
    return condition;
  }
  bool ok() const { return ok_; }
  const std::string& detail() const { return detail_; }

 private:
  bool ok_ = true;
  std::string detail_;
};

constexpr char kA[] = "00:1a:7d:da:71:01";
constexpr char kB[] = "00:1a:7d:da:71:02";

Bytes Padded(Bytes b, size_t n) {
  b.resize(n, 0);
  return b;
}

uint32_t Le32(const Bytes& b, size_t at) {
  return uint32_t{b[at]} | uint32_t{b[at + 1]} << 8 | uint32_t{b[at + 2]} << 16 | uint32_t{b[at + 3]} << 24;
}

template <typename F>
bool Throws(F&& f) {
  try {
    f();
  } catch (const Error&) {
    return true;
  }
  return false;
}

// Diagnostic frames `name`'s host received, as raw envelope bodies.
std::vector<Bytes> RawDiagToHost(const World& world, const std::string& name) {
  std::vector<Bytes> out;
  for (const auto& f : world.ToHost(name)) {
    if (f.type == h4::H4Type::kDiag) out.push_back(f.payload);
  }
  return out;
}

// ---------------------------------------------------------------------------

void ByteFixtures(Check& c) {
  h4::DecodeResult r = h4::DecodeStream(Hex("01 01 10 00"));
  if (c.Require(r.frames.size() == 1 && r.consumed == 4 && !r.error, "01 01 10 00 is one frame")) {
    h4::HciCommand cmd = h4::ParseCommand(r.frames[0]);
    c.Require(cmd.opcode == 0x1001 && cmd.params.empty(), "read-local-version opcode");
    c.Require(hci::CommandName(cmd.opcode) == "Read_Local_Version_Information", "read-local-version name");
  }
  c.Require(h4::EncodeFrame(h4::MakeCommandFrame({0x1001, {}})) == Hex("01 01 10 00"), "command encode");

  c.Require(diag::ParseDiag(Hex("f0 01")) == diag::MakeToggle(true), "f0 01 enables logging");
  c.Require(diag::ParseDiag(Hex("f0 00")) == diag::MakeToggle(false), "f0 00 disables logging");
  c.Require(h4::EncodeFrame(diag::ToFrame(diag::MakeToggle(true))) == Padded(Hex("07 f0 01"), 64),
            "toggle on wire");
  c.Require(h4::EncodeFrame(diag::ToFrame(diag::MakeToggle(false))) == Padded(Hex("07 f0 00"), 64),
            "toggle off wire");

  c.Require(diag::BuildDiag(diag::MakePeek(diag::MemAccessType::kArm, 0x00200010)) == Hex("f1 02 10 00 20 00"),
            "peek arm layout");
  c.Require(diag::BuildDiag(diag::MakePeek(diag::MemAccessType::kBlueRf, 0x34)) == Hex("f1 03 34 00 00 00"),
            "peek bluerf layout");
  c.Require(diag::BuildDiag(diag::MakePoke(diag::MemAccessType::kArm, 0x00200010, 0x7f)) ==
                Hex("f2 02 10 00 20 00 7f"),
            "poke layout");
  c.Require(diag::BuildDiag(diag::MakeHexdump(0x00200000)) == Hex("f3 04 00 00 20 00"), "hexdump layout");
  c.Require(diag::ParseDiag(Hex("f1 02 78 56 34 12")) == diag::MakePeek(diag::MemAccessType::kArm, 0x12345678),
            "peek address is little-endian");
  c.Require(Throws([] { diag::ParseDiag(Hex("f1 04 00 00 00 00")); }), "hexdump access type refused for peek");
  c.Require(Throws([] { diag::ParseDiag(Hex("f3 02 00 00 00 00")); }), "peek access type refused for hexdump");

  Bytes response = Hex("04 00 00 20 00");
  for (int i = 0; i < 32; ++i) response.push_back(static_cast<uint8_t>(i));
  auto msg = diag::ParseDiag(response);
  const auto* dump = std::get_if<diag::HexdumpResponse>(&msg.body);
  if (c.Require(dump != nullptr, "hexdump response parses")) {
    c.Require(dump->address == 0x00200000 && dump->data.size() == 32 && dump->data[31] == 31,
              "hexdump response carries 32 data octets");
  }
  c.Require(diag::BuildDiag(msg) == response, "hexdump response rebuilds");
  c.Require(Throws([&] { diag::ParseDiag(ByteView(response).first(response.size() - 1)); }),
            "31 data octets rejected");
}

void CodecFuzzing(Check& c) {
  Gen g(0xacc2);
  for (int i = 0; i < 10000 && c.ok(); ++i) {
    h4::H4Frame f = testing::RandomH4Frame(g);
    Bytes wire = h4::EncodeFrame(f);
    h4::DecodeResult r = h4::DecodeStream(wire);
    c.Require(testing::OracleFrameSize(wire) == wire.size(), "H4 frame size disagrees with framing rules");
    c.Require(r.frames.size() == 1 && r.frames[0] == f && r.consumed == wire.size(), "H4 round trip " + ToHex(wire));
  }
  for (int i = 0; i < 10000 && c.ok(); ++i) {
    diag::DiagMessage m = testing::RandomDiag(g);
    Bytes body = diag::BuildDiag(m);
    c.Require(diag::ParseDiag(body) == m, "diag round trip " + ToHex(body));
    c.Require(diag::FromFrame(h4::DecodeStream(h4::EncodeFrame(diag::ToFrame(m))).frames.at(0)) == m,
              "diag envelope round trip " + ToHex(body));
  }
  for (int i = 0; i < 10000 && c.ok(); ++i) {
    ll::LinkPdu pdu = testing::RandomLinkPdu(g);
    Bytes raw = ll::BuildLmp(pdu);
    c.Require(ll::DissectLmp(raw, false) == pdu, "LMP round trip " + ToHex(raw));
  }
  for (int i = 0; i < 10000 && c.ok(); ++i) {
    ll::LcpPdu pdu = testing::RandomLcp(g);
    Bytes raw = ll::BuildLcp(pdu);
    c.Require(ll::DissectLcp(raw) == pdu, "LCP round trip " + ToHex(raw));
  }

  // Incremental decoding against one-shot decoding at every split point.
  for (int round = 0; round < 20 && c.ok(); ++round) {
    Bytes stream;
    for (int n = 0; n < 8; ++n) {
      Bytes e = h4::EncodeFrame(n % 2 ? diag::ToFrame(testing::RandomDiag(g)) : testing::RandomH4Frame(g));
      stream.insert(stream.end(), e.begin(), e.end());
    }
    Bytes tail = h4::EncodeFrame(testing::RandomH4Frame(g));
    stream.insert(stream.end(), tail.begin(), tail.end() - 1);
    h4::DecodeResult one_shot = h4::DecodeStream(stream);
    for (size_t split = 0; split <= stream.size() && c.ok(); ++split) {
      h4::StreamDecoder d;
      auto a = d.Feed(ByteView(stream).first(split));
      auto b = d.Feed(ByteView(stream).subspan(split));
      a.insert(a.end(), b.begin(), b.end());
      c.Require(a == one_shot.frames && d.buffered() == tail.size() - 1,
                "incremental decode differs at split " + std::to_string(split));
    }
  }
}

void TableCompleteness(Check& c) {
  int codes = 0;
  for (diag::DiagCode code : diag::AllDiagCodes()) {
    Bytes wire{static_cast<uint8_t>(code)};
    Bytes body = testing::SampleDiagBody(code);
    wire.insert(wire.end(), body.begin(), body.end());
    bool ok = false;
    try {
      diag::DiagMessage m = diag::ParseDiag(wire);
      ok = m.code == code && diag::BuildDiag(m) == wire && !diag::DiagCodeName(code).empty();
    } catch (const Error&) {
    }
    c.Require(ok, "diagnostic code " + ToHex(Bytes{static_cast<uint8_t>(code)}));
    codes += ok;
  }
  c.Require(codes == 27, "expected 27 diagnostic codes, got " + std::to_string(codes));

  int subtypes = 0;
  for (uint8_t s = 0; s <= 5; ++s) {
    ll::BpcsPdu pdu{0, s, Hex("01")};
    bool ok = ll::DissectLmp(ll::BuildLmp(pdu), false) == ll::LinkPdu(pdu) && ll::BpcsSubtypeName(s).has_value();
    c.Require(ok, "BPCS subtype " + std::to_string(s));
    subtypes += ok;
  }
  c.Require(subtypes == 6, "expected 6 BPCS subtypes");
  ll::BpcsPdu dut{0, 0x95, {}};
  c.Require(Throws([&] { ll::BuildLmp(dut); }), "BPCS 0x95 is refused by the conformant builder");
  c.Require(ll::DissectLmp(ll::BuildLmp(dut, true), false) == ll::LinkPdu(dut), "BPCS 0x95 non-conformant");

  int vendor = 0;
  for (uint8_t s = 1; s <= 4; ++s) {
    Bytes params = s == 4 ? Hex("01 02 03 04 05 06") : Hex("aa");
    ll::LcpPdu pdu = ll::MakeVendorLcp(static_cast<ll::VendorLcpSubtype>(s), params);
    Bytes raw = ll::BuildLcp(pdu);
    bool ok = raw[0] == 0xff && raw[1] == s && ll::DissectLcp(raw) == pdu && ll::VendorLcpSubtypeName(s);
    c.Require(ok, "vendor LCP subtype " + std::to_string(s));
    vendor += ok;
  }
  c.Require(vendor == 4, "expected 4 vendor LCP subtypes");
}

// Per-side (sent?, name) sequence the setup script prescribes.
std::vector<std::pair<bool, std::string>> ExpectedSetup(std::string_view script, bool master) {
  std::vector<std::pair<bool, std::string>> out;
  for (const auto& step : emu::ParseSetupScript(script)) out.emplace_back(step.by_master == master, step.pdu);
  return out;
}

void EndToEndLogging(Check& c) {
  for (emu::Transport transport : {emu::Transport::kClassic, emu::Transport::kLe}) {
    bool classic = transport == emu::Transport::kClassic;
    std::string label = classic ? "classic: " : "LE: ";
    World world;
    world.Add("a", kA);
    world.Add("b", kB);
    world.Link("a", "b");
    std::map<std::string, int> air;  // control PDUs transmitted, by sender
    world.sim.AddAirTap([&](emu::Tick, const emu::AirFrame& f) {
      if (std::holds_alternative<emu::ControlPdu>(f.body)) ++air[f.from.ToString()];
    });
    c.Require(world.Run("a", "diag on").ok && world.Run("b", "diag on").ok, label + "diag on");
    auto r = world.Run("a", std::string(classic ? "connect " : "leconnect ") + kB);
    c.Require(r.ok, label + "connect failed: " + r.output);

    for (const char* side : {"a", "b"}) {
      bool master = std::string(side) == "a";
      BdAddr peer = BdAddr::FromString(master ? kB : kA);
      Bytes peer_le(peer.octets.begin(), peer.octets.end());
      std::vector<std::pair<bool, std::string>> logged;
      int sent = 0, received = 0;
      for (const Bytes& body : RawDiagToHost(world, side)) {
        uint8_t code = body[0];
        if (classic && (code == 0x00 || code == 0x01)) {
          // code, 4-octet low MAC, 17-octet record
          c.Require(Bytes(body.begin() + 1, body.begin() + 5) == Bytes(peer_le.begin(), peer_le.begin() + 4),
                    label + "LMP record MAC is not the peer's low 4 octets");
          auto msg = diag::ParseDiag(body);
          const auto& rec = std::get<diag::LmpLogRecord>(msg.body);
          if (code == 0x01) {
            c.Require(diag::BuildDiag(msg).size() == 1 + 4 + 17, label + "RX record is not 17 octets");
          }
          auto pdu = ll::DissectLmp(rec.payload, true);
          const auto* lmp = std::get_if<ll::LmpPdu>(&pdu);
          logged.emplace_back(code == 0x00, lmp ? std::string(ll::LmpName(*lmp)) : "BPCS");
          (code == 0x00 ? sent : received)++;
        } else if (!classic && (code == 0x80 || code == 0x81)) {
          // code, 6-octet MAC, length, PDU
          c.Require(Bytes(body.begin() + 1, body.begin() + 7) == peer_le, label + "LCP record MAC is not 6 octets");
          Bytes pdu(body.begin() + 8, body.begin() + 8 + body[7]);
          const ll::OpcodeEntry* e = ll::OpcodeTable::Lcp().Find(pdu[0]);
          std::string name = e ? e->name : "?";
          if (pdu[0] == 0xff) name += " " + ToHex(Bytes{pdu[1]});
          logged.emplace_back(code == 0x80, name);
          (code == 0x80 ? sent : received)++;
        }
      }
      auto expected = ExpectedSetup(classic ? ll::ConnectionSetupScriptText() : ll::LeConnectionSetupScriptText(),
                                    master);
      if (!classic) {
        // Vendor steps are logged with their subtype.
        size_t v = 0;
        for (auto& [dir, name] : expected) {
          if (name == "LL_VENDOR") name += v++ == 0 ? " 01" : " 02";
        }
      }
      c.Require(logged == expected, label + "side " + side + " log does not follow the setup sequence");
      c.Require(sent == air[(master ? BdAddr::FromString(kA) : peer).ToString()],
                label + "sent records differ from air tally");
      c.Require(received == air[peer.ToString()], label + "received records differ from air tally");
    }
  }
}

struct AttackWorld {
  explicit AttackWorld(emu::SecurityProfile victim_profile) {
    world.Add("attacker", kA, emu::SecurityProfile::Vulnerable(), /*unchecked_injection=*/true);
    world.Add("victim", kB, std::move(victim_profile));
    world.Link("attacker", "victim");
    world.sim.AddAirTap([this](emu::Tick, const emu::AirFrame& f) {
      const auto* pdu = std::get_if<emu::ControlPdu>(&f.body);
      if (pdu && f.from == BdAddr::FromString(kB)) victim_air.push_back(pdu->raw);
    });
    connected = world.Run("attacker", "diag on").ok && world.Run("attacker", std::string("connect ") + kB).ok;
  }
  emu::Controller& victim() { return world.sim.controller("victim"); }
  World world;
  std::vector<Bytes> victim_air;
  bool connected = false;
};

bool HasCompletionFor(const std::vector<h4::H4Frame>& frames, uint16_t opcode) {
  for (const auto& f : frames) {
    if (f.type == h4::H4Type::kHciEvent && f.payload.size() >= 5 && f.payload[0] == 0x0e &&
        (f.payload[3] | f.payload[4] << 8) == opcode) {
      return true;
    }
  }
  return false;
}

void BpcsOverflow(Check& c) {
  {
    AttackWorld w(emu::SecurityProfile::Vulnerable());
    c.Require(w.connected, "vulnerable: connect");
    c.Require(!w.victim().dut_mode(), "vulnerable: not in test mode before the attack");
    c.Require(w.world.Run("attacker", "sendlmp 000b 00 95").ok, "vulnerable: injection");
    c.Require(w.victim().dut_mode(), "vulnerable: test mode not entered");
    c.Require(HasCompletionFor(w.world.ToHost("victim"), 0x1803),
              "vulnerable: no unsolicited Enable_Device_Under_Test_Mode completion");
  }
  {
    AttackWorld w(emu::SecurityProfile::Patched());
    c.Require(w.connected, "patched: connect");
    auto before = w.victim().Snapshot();
    c.Require(w.world.Run("attacker", "sendlmp 000b 00 95").ok, "patched: injection");
    c.Require(!w.victim().dut_mode(), "patched: entered test mode");
    c.Require(!w.victim_air.empty() && w.victim_air.back() == Hex("00 02 95"), "patched: no BPCS NotAccept");
    c.Require(w.victim().Snapshot() == before, "patched: state snapshot changed");
  }
}

void EarlyEncryption(Check& c) {
  const std::string attack = "sendlmp 000b 22 00 11 22 33 44 55 66 77 88 99 aa bb cc dd ee ff";
  {
    AttackWorld w(emu::SecurityProfile::Vulnerable());
    c.Require(w.connected, "vulnerable: connect");
    c.Require(w.world.Run("attacker", "auth 000b").ok, "vulnerable: pairing start");
    const emu::Connection* conn = std::as_const(w.victim()).FindConnection(BdAddr::FromString(kA),
                                                                           emu::Transport::kClassic);
    c.Require(conn && conn->phase == emu::Phase::kSspPending, "vulnerable: victim not in ssp_pending");
    w.world.Run("attacker", attack);
    auto frames = w.world.ToHost("victim");
    c.Require(!frames.empty() && h4::EncodeFrame(frames.back()) == Hex("04 10 01 00"),
              "vulnerable: no Hardware Error event");
    c.Require(w.victim().crash_count() == 1, "vulnerable: controller did not reset");
    c.Require(w.victim().connections().empty(), "vulnerable: connections survived the reset");
    auto v = w.world.Run("victim", "version");
    c.Require(v.ok, "vulnerable: read-local-version after reset: " + v.output);
    c.Require(!w.world.Run("victim", "disconnect 000b").ok, "vulnerable: old handle still valid");
  }
  {
    AttackWorld w(emu::SecurityProfile::Patched());
    c.Require(w.connected, "patched: connect");
    c.Require(w.world.Run("attacker", "auth 000b").ok, "patched: pairing start");
    w.world.Run("attacker", attack);
    c.Require(!w.victim_air.empty() && w.victim_air.back() == Hex("08 11 24"),
              "patched: no LMP_not_accepted(start_encryption_req, 0x24)");
    c.Require(w.victim().crash_count() == 0, "patched: crashed");
    const emu::Connection* conn = std::as_const(w.victim()).FindConnection(BdAddr::FromString(kA),
                                                                           emu::Transport::kClassic);
    c.Require(conn && conn->phase == emu::Phase::kSspPending, "patched: pairing state changed");
  }
}

void FirewallProperty(Check& c) {
  auto classic = testing::RunFirewallProperty(emu::Transport::kClassic, 0xacc7, 10000);
  c.Require(!classic.violation, "classic " + classic.violation.value_or(""));
  c.Require(classic.sequences == 10000, "classic: sequences run");
  c.Require(classic.initial_refusals == classic.sequences, "classic: an initial request went unrefused");
  auto le = testing::RunFirewallProperty(emu::Transport::kLe, 0xacc8, 2000);
  c.Require(!le.violation, "LE " + le.violation.value_or(""));
  c.Require(le.initial_refusals == le.sequences && le.sequences == 2000, "LE: an initial request went unrefused");
}

// tx and rx counters of the last BR ACL stats response, read off the wire.
std::optional<std::pair<uint32_t, uint32_t>> LastBrStats(const World& world, const std::string& name,
                                                          std::vector<uint32_t>* all = nullptr) {
  auto bodies = RawDiagToHost(world, name);
  for (auto it = bodies.rbegin(); it != bodies.rend(); ++it) {
    if ((*it)[0] != 0x16) continue;
    if (all) {
      all->clear();
      for (size_t i = 0; i < 5; ++i) all->push_back(Le32(*it, 1 + 4 * i));
    }
    return std::pair{Le32(*it, 1), Le32(*it, 5)};
  }
  return std::nullopt;
}

void StatisticsConsistency(Check& c) {
  constexpr uint32_t kN = 37;
  World world;
  world.Add("a", kA);
  world.Add("b", kB);
  world.Link("a", "b");
  c.Require(world.Run("a", std::string("connect ") + kB).ok, "connect");
  for (uint32_t i = 0; i < kN; ++i) {
    c.Require(world.Run("a", "acl 000b " + ToHex(Bytes(1 + i % 20, static_cast<uint8_t>(i)))).ok, "acl send");
  }
  c.Require(world.Run("a", "stats br").ok && world.Run("b", "stats br").ok, "stats request");
  auto a = LastBrStats(world, "a");
  auto b = LastBrStats(world, "b");
  c.Require(a && a->first == kN, "sender tx != N");
  c.Require(b && b->second == kN, "receiver rx != N");
  for (const char* side : {"a", "b"}) {
    std::vector<uint32_t> values;
    c.Require(world.Run(side, "stats br reset").ok, "reset request");
    c.Require(LastBrStats(world, side, &values) && values == std::vector<uint32_t>(5, 0),
              std::string("reset response not all zero on ") + side);
    c.Require(world.Run(side, "stats br").ok, "stats after reset");
    c.Require(LastBrStats(world, side, &values) && values == std::vector<uint32_t>(5, 0),
              std::string("counters not zero after reset on ") + side);
  }
}

std::optional<Bytes> LastTestCompleted(const World& world, const std::string& name) {
  auto bodies = RawDiagToHost(world, name);
  for (auto it = bodies.rbegin(); it != bodies.rend(); ++it) {
    if ((*it)[0] == 0x0a) return Bytes(it->begin() + 1, it->begin() + 8);
  }
  return std::nullopt;
}

void TestMode(Check& c) {
  {
    World world;
    world.Add("a", kA);
    world.Add("b", kB);
    world.Link("a", "b");
    c.Require(world.Run("b", "dut").ok, "peer enters test mode");
    c.Require(world.Run("a", "test count=100").ok, "linked run");
    // status, tx LE16, reserved LE16, rx LE16
    c.Require(LastTestCompleted(world, "a") == Hex("00 64 00 00 00 64 00"),
              "linked run did not report tx=100 rx=100 reserved=0");
  }
  {
    World world;
    world.Add("a", kA);
    c.Require(world.Run("a", "test count=100").ok, "unlinked run");
    c.Require(LastTestCompleted(world, "a") == Hex("00 64 00 00 00 00 00"), "unlinked run did not report rx=0");
  }
}

bool IsHciType(h4::H4Type t) {
  return t == h4::H4Type::kHciCommand || t == h4::H4Type::kAclData || t == h4::H4Type::kScoData ||
         t == h4::H4Type::kHciEvent;
}

// Mixed HCI + diagnostic traffic through a capturing session.
std::filesystem::path CaptureRun(World& world, const std::string& format, Check& c) {
  auto path = std::filesystem::temp_directory_path() /
              ("btdiag_acceptance_" + std::to_string(::getpid()) + "." + format);
  world.Add("a", kA);
  world.Add("b", kB);
  world.Link("a", "b");
  c.Require(world.Run("a", "capture start " + path.string() + " " + format).ok, "capture start");
  for (const char* line : {"diag on", "version", "connect 00:1a:7d:da:71:02", "acl 000b 01 02 03", "peek arm 200000",
                           "stats br"}) {
    c.Require(world.Run("a", line).ok, std::string("capture script: ") + line);
  }
  c.Require(world.Run("a", "capture stop").ok, "capture stop");
  return path;
}

std::vector<emu::TrafficEvent> TrafficOf(const World& world, const std::string& name) {
  std::vector<emu::TrafficEvent> out;
  for (const auto& ev : world.sim.traffic()) {
    if (ev.controller == name) out.push_back(ev);
  }
  return out;
}

void CaptureFidelity(Check& c) {
  {
    World world;
    auto path = CaptureRun(world, "pcap", c);
    auto file = testing::ReadPcapng(testing::ReadFileBytes(path));
    std::filesystem::remove(path);
    auto traffic = TrafficOf(world, "a");
    c.Require(file.link_types == std::vector<uint16_t>{201, 147}, "interface link types");
    c.Require(file.packets.size() == traffic.size(), "pcapng record count");
    size_t diag = 0;
    for (size_t i = 0; i < std::min(file.packets.size(), traffic.size()); ++i) {
      const auto& p = file.packets[i];
      const auto& ev = traffic[i];
      bool hci = IsHciType(ev.frame.type);
      diag += !hci;
      size_t prefix = hci ? 4 : 1;
      Bytes wire = h4::EncodeFrame(ev.frame);
      c.Require(file.link_types.at(p.interface_id) == (hci ? 201 : 147), "record " + std::to_string(i) + " link type");
      c.Require(p.data.size() == prefix + wire.size() && Bytes(p.data.begin() + prefix, p.data.end()) == wire,
                "record " + std::to_string(i) + " H4 payload differs");
      c.Require(p.data[prefix - 1] == (ev.direction == Direction::kControllerToHost ? 1 : 0),
                "record " + std::to_string(i) + " direction");
    }
    c.Require(diag > 0 && diag < traffic.size(), "capture is not mixed");
  }
  {
    World world;
    auto path = CaptureRun(world, "btsnoop", c);
    auto file = testing::ReadBtsnoop(testing::ReadFileBytes(path));
    std::filesystem::remove(path);
    std::vector<Bytes> expected;
    size_t non_hci = 0;
    for (const auto& ev : TrafficOf(world, "a")) {
      if (IsHciType(ev.frame.type)) {
        expected.push_back(h4::EncodeFrame(ev.frame));
      } else {
        ++non_hci;
      }
    }
    c.Require(file.datalink == 1002, "BTSnoop datalink");
    c.Require(file.packets.size() == expected.size(), "BTSnoop kept " + std::to_string(file.packets.size()) +
                                                          " of " + std::to_string(expected.size()) + " HCI records");
    for (size_t i = 0; i < std::min(file.packets.size(), expected.size()); ++i) {
      c.Require(file.packets[i].data == expected[i], "BTSnoop record " + std::to_string(i));
    }
    c.Require(non_hci > 0, "no diagnostic records were skipped");
  }
}

struct Criterion {
  const char* id;
  const char* title;
  std::function<void(Check&)> run;
};

}  // namespace
}  // namespace btdiag

int main() {
  using namespace btdiag;
  const Criterion criteria[] = {
      {"AC1", "byte fixtures", ByteFixtures},
      {"AC2", "codec round-trip fuzzing", CodecFuzzing},
      {"AC3", "table completeness", TableCompleteness},
      {"AC4", "end-to-end logging", EndToEndLogging},
      {"AC5", "CVE-2018-19860 reproduction", BpcsOverflow},
      {"AC6", "CVE-2019-6994 reproduction", EarlyEncryption},
      {"AC7", "firewall property", FirewallProperty},
      {"AC8", "statistics consistency", StatisticsConsistency},
      {"AC9", "test mode", TestMode},
      {"AC10", "capture fidelity", CaptureFidelity},
  };
  int failed = 0;
  for (const auto& criterion : criteria) {
    Check check;
    auto start = std::chrono::steady_clock::now();
    try {
      criterion.run(check);
    } catch (const std::exception& e) {
      check.Require(false, std::string("exception: ") + e.what());
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %-5s %-30s %7.3fs%s%s\n", check.ok() ? "PASS" : "FAIL", criterion.id, criterion.title, seconds,
                check.ok() ? "" : "  ", check.detail().c_str());
    failed += !check.ok();
  }
  return failed == 0 ? 0 : 1;
}
