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

#include "btdiag/controller.h"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "btdiag/hci.h"

namespace btdiag::emu {
namespace {

using diag::DiagCode;
using diag::DiagMessage;

constexpr uint8_t kLmpFeatures[8] = {0xbf, 0xfe, 0xcf, 0xfe, 0xdb, 0xff, 0x7b, 0x87};
constexpr uint8_t kLmpFeaturesPage1[10] = {0x01, 0x02, 0x0f, 0, 0, 0, 0, 0, 0, 0};
constexpr uint8_t kLeFeatures[8] = {0x01, 0, 0, 0, 0, 0, 0, 0};
constexpr uint8_t kBpcsFeatures[8] = {0x00, 0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00};
constexpr size_t kMaxAllowlist = 40;

std::string Hex2(uint8_t v) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "0x%02x", v);
  return buf;
}

std::string Hex4(uint16_t v) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "0x%04x", v);
  return buf;
}

bool IsResponseName(std::string_view name) {
  auto ends_with = [&](std::string_view s) {
    return name.size() >= s.size() && name.substr(name.size() - s.size()) == s;
  };
  return ends_with("_res") || ends_with("_res_ext") || name == "LMP_accepted" ||
         name == "LMP_not_accepted" || name == "LMP_accepted_ext" || name == "LMP_not_accepted_ext";
}

MemKind KindFor(diag::MemAccessType access) {
  return access == diag::MemAccessType::kBlueRf ? MemKind::kBlueRf : MemKind::kArm;
}

MemoryImage InitialMemory(const ControllerConfig& config) {
  MemoryImage image = MemoryImage::Default("BCM-EMU " + config.name + " fw " + Hex4(config.lmp_subversion));
  for (const auto& load : config.memory_loads) image.LoadFile(load.kind, load.base, load.path);
  return image;
}

}  // namespace

// Brackets one externally triggered handler invocation so the frames it
// emits can be returned to the caller.
class Controller::CallScope {
 public:
  explicit CallScope(Controller& c) : c_(c) {
    if (c_.call_depth_++ == 0) {
      c_.call_output_.clear();
      c_.air_out_.clear();
    }
  }
  ~CallScope() { --c_.call_depth_; }

 private:
  Controller& c_;
};

std::string_view PhaseName(Phase phase) {
  switch (phase) {
    case Phase::kPaging: return "paging";
    case Phase::kLmpSetup: return "lmp_setup";
    case Phase::kConnected: return "connected";
    case Phase::kSspPending: return "ssp_pending";
    case Phase::kEncrypted: return "encrypted";
  }
  return "?";
}

SecurityProfile SecurityProfile::Vulnerable() { return SecurityProfile{}; }

SecurityProfile SecurityProfile::Patched() {
  SecurityProfile p;
  p.bpcs_bounds_check = true;
  p.encryption_order_check = true;
  return p;
}

HandlerAction SecurityProfile::OverflowAction(uint8_t subtype) const {
  auto it = bpcs_overflow_map.find(subtype);
  return it == bpcs_overflow_map.end() ? bpcs_overflow_default : it->second;
}

std::vector<SetupStep> ParseSetupScript(std::string_view text) {
  std::vector<SetupStep> steps;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string sender;
    SetupStep step;
    if (!(fields >> sender >> step.pdu) || (sender != "M" && sender != "S")) {
      throw Error(ErrorKind::kParse, "setup script line " + std::to_string(line_no) + " malformed");
    }
    step.by_master = sender == "M";
    std::string rest;
    std::getline(fields, rest);
    if (rest.find_first_not_of(" \t") != std::string::npos) step.params = ParseHex(rest);
    steps.push_back(std::move(step));
  }
  return steps;
}

Controller::Controller(ControllerConfig config)
    : config_(std::move(config)), memory_(InitialMemory(config_)), rng_(config_.seed) {}

Tick Controller::Now() const { return port_ ? port_->Now() : 0; }

void Controller::Emit(h4::H4Frame frame) {
  call_output_.push_back(frame);
  if (host_sink_) host_sink_(frame);
}

void Controller::EmitDiag(const DiagMessage& msg) { Emit(diag::ToFrame(msg)); }

void Controller::Audit(std::string text) {
  audit_.push_back("[" + std::to_string(Now()) + "] " + config_.name + ": " + std::move(text));
}

void Controller::Transmit(const BdAddr& to, Transport transport, AirBody body) {
  AirFrame frame{config_.mac, to, transport, std::move(body)};
  air_out_.push_back(frame);
  if (port_) port_->Transmit(frame);
}

void Controller::Schedule(Tick delay, std::function<void()> callback) {
  if (!port_) return;
  uint64_t epoch = epoch_;
  port_->Schedule(delay, [this, epoch, cb = std::move(callback)] {
    if (epoch != epoch_) return;  // controller was reset since
    CallScope scope(*this);
    cb();
  });
}

const Connection* Controller::FindConnection(const BdAddr& peer, Transport transport) const {
  for (const auto& [handle, conn] : connections_) {
    if (conn.peer == peer && conn.transport == transport) return &conn;
  }
  return nullptr;
}

Connection* Controller::FindConnection(const BdAddr& peer, Transport transport) {
  return const_cast<Connection*>(std::as_const(*this).FindConnection(peer, transport));
}

Connection* Controller::FindConnection(uint16_t handle) {
  auto it = connections_.find(handle);
  return it == connections_.end() ? nullptr : &it->second;
}

uint16_t Controller::AllocateHandle() {
  for (int tries = 0; tries <= kMaxHandle; ++tries) {
    uint16_t h = next_handle_;
    next_handle_ = next_handle_ >= kMaxHandle ? 1 : static_cast<uint16_t>(next_handle_ + 1);
    if (!connections_.contains(h)) return h;
  }
  throw Error(ErrorKind::kInvariantViolation, "connection handles exhausted");
}

ControllerSnapshot Controller::Snapshot() const {
  ControllerSnapshot s;
  s.mac = config_.mac;
  s.profile = config_.profile;
  for (const auto& [h, c] : connections_) s.connections.push_back(c);
  s.diag_log_enabled = diag_log_enabled_;
  s.dut_mode = dut_mode_;
  s.test_running = test_.has_value();
  s.stats = stats_;
  s.memory = memory_;
  return s;
}

void Controller::Reset() {
  CallScope scope(*this);
  for (const auto& [h, c] : connections_) Transmit(c.peer, c.transport, LinkLoss{});
  connections_.clear();
  diag_log_enabled_ = false;
  dut_mode_ = false;
  memory_ = InitialMemory(config_);
  stats_ = {};
  test_.reset();
  next_handle_ = kFirstHandle;
  rx_buffer_.fill(0);
  ++epoch_;
}

// ---------------------------------------------------------------------------
// Host side

std::vector<h4::H4Frame> Controller::HandleHostFrame(const h4::H4Frame& frame) {
  CallScope scope(*this);
  try {
    switch (frame.type) {
      case h4::H4Type::kHciCommand:
        HandleCommand(h4::ParseCommand(frame));
        break;
      case h4::H4Type::kAclData:
        HandleAclFromHost(frame);
        break;
      case h4::H4Type::kDiag: {
        DiagMessage msg = diag::FromFrame(frame);
        for (const auto& response : HandleDiag(msg)) EmitDiag(response);
        break;
      }
      case h4::H4Type::kMsgQueuePut:
      case h4::H4Type::kWiced:
        Audit(std::string("opaque ") + std::string(h4::H4TypeName(frame.type)) + " frame accepted");
        break;
      case h4::H4Type::kScoData:
        Audit("SCO data without a SCO link dropped");
        break;
      case h4::H4Type::kHciEvent:
        Audit("HCI event received from host; ignored");
        break;
    }
  } catch (const Error& e) {
    Audit(std::string("malformed host frame: ") + e.what());
  }
  return call_output_;
}

void Controller::CommandComplete(uint16_t opcode, Bytes params) {
  Emit(hci::CommandComplete(opcode, params));
}

void Controller::HandleCommand(const h4::HciCommand& cmd) {
  const Bytes& p = cmd.params;
  switch (cmd.opcode) {
    case hci::op::kReset:
      Reset();
      CommandComplete(cmd.opcode, {hci::status::kSuccess});
      return;
    case hci::op::kReadLocalVersion: {
      Bytes r{hci::status::kSuccess, config_.hci_version};
      PutLe16(r, config_.hci_revision);
      r.push_back(config_.lmp_version);
      PutLe16(r, hci::kBroadcomCompanyId);
      PutLe16(r, config_.lmp_subversion);
      CommandComplete(cmd.opcode, std::move(r));
      return;
    }
    case hci::op::kReadBdAddr: {
      Bytes r{hci::status::kSuccess};
      r.insert(r.end(), config_.mac.octets.begin(), config_.mac.octets.end());
      CommandComplete(cmd.opcode, std::move(r));
      return;
    }
    case hci::op::kCreateConnection:
    case hci::op::kLeCreateConnection: {
      bool le = cmd.opcode == hci::op::kLeCreateConnection;
      size_t offset = le ? 6 : 0;
      if (p.size() < offset + 6) {
        Emit(hci::CommandStatus(hci::status::kInvalidParameters, cmd.opcode));
        return;
      }
      BdAddr peer = BdAddr::FromLittleEndian(ByteView(p).subspan(offset, 6));
      Transport transport = le ? Transport::kLe : Transport::kClassic;
      if (peer == config_.mac || FindConnection(peer, transport)) {
        Emit(hci::CommandStatus(hci::status::kCommandDisallowed, cmd.opcode));
        return;
      }
      Emit(hci::CommandStatus(hci::status::kSuccess, cmd.opcode));
      CreateConnection(peer, transport, cmd.opcode);
      return;
    }
    case hci::op::kDisconnect: {
      Connection* conn = p.size() >= 3 ? FindConnection(GetLe16(p, 0)) : nullptr;
      if (!conn || conn->phase < Phase::kConnected) {
        Emit(hci::CommandStatus(hci::status::kUnknownConnectionId, cmd.opcode));
        return;
      }
      Emit(hci::CommandStatus(hci::status::kSuccess, cmd.opcode));
      DropConnection(conn->handle, p[2], /*notify_peer=*/true);
      return;
    }
    case hci::op::kAuthenticationRequested: {
      Connection* conn = p.size() >= 2 ? FindConnection(GetLe16(p, 0)) : nullptr;
      if (!conn || conn->transport != Transport::kClassic || conn->phase != Phase::kConnected) {
        Emit(hci::CommandStatus(conn ? hci::status::kCommandDisallowed : hci::status::kUnknownConnectionId,
                                cmd.opcode));
        return;
      }
      Emit(hci::CommandStatus(hci::status::kSuccess, cmd.opcode));
      conn->phase = Phase::kSspPending;
      // IO capability DisplayYesNo, no OOB data, MITM with general bonding.
      SendLmp(*conn, ll::MakeLmp("LMP_IO_capability_req", ll::DefaultTid(conn->role), {0x01, 0x00, 0x03}));
      return;
    }
    case hci::op::kSetConnectionEncryption: {
      Connection* conn = p.size() >= 3 ? FindConnection(GetLe16(p, 0)) : nullptr;
      if (!conn) {
        Emit(hci::CommandStatus(hci::status::kUnknownConnectionId, cmd.opcode));
        return;
      }
      if (p[2] != 1 || conn->phase != Phase::kSspPending || !conn->SspComplete()) {
        Emit(hci::CommandStatus(hci::status::kCommandDisallowed, cmd.opcode));
        return;
      }
      Emit(hci::CommandStatus(hci::status::kSuccess, cmd.opcode));
      conn->encryption_requested = true;
      Bytes rand(16);
      for (auto& b : rand) b = static_cast<uint8_t>(rng_());
      SendLmp(*conn, ll::MakeLmp("LMP_start_encryption_req", ll::DefaultTid(conn->role), rand));
      return;
    }
    case hci::op::kUserConfirmationRequestReply: {
      if (p.size() < 6) {
        CommandComplete(cmd.opcode, {hci::status::kInvalidParameters});
        return;
      }
      BdAddr peer = BdAddr::FromLittleEndian(p);
      Connection* conn = FindConnection(peer, Transport::kClassic);
      Bytes r{hci::status::kSuccess};
      r.insert(r.end(), p.begin(), p.begin() + 6);
      if (!conn || conn->phase != Phase::kSspPending || conn->local_confirmed) {
        r[0] = conn ? hci::status::kCommandDisallowed : hci::status::kUnknownConnectionId;
        CommandComplete(cmd.opcode, std::move(r));
        return;
      }
      CommandComplete(cmd.opcode, std::move(r));
      conn->local_confirmed = true;
      Bytes check(16);
      for (auto& b : check) b = static_cast<uint8_t>(rng_());
      SendLmp(*conn, ll::MakeLmp("LMP_DHkey_check", ll::DefaultTid(conn->role), check));
      CheckPairingComplete(*conn);
      return;
    }
    case hci::op::kEnableDeviceUnderTestMode:
      CommandComplete(cmd.opcode, {hci::status::kSuccess});
      EnterDutMode(/*unsolicited=*/false);
      return;
    default:
      break;
  }
  if ((cmd.opcode >> 10) == 0x3f) {
    HandleVendorCommand(cmd);
    return;
  }
  Audit("unknown HCI command " + Hex4(cmd.opcode));
  CommandComplete(cmd.opcode, {hci::status::kUnknownCommand});
}

void Controller::HandleVendorCommand(const h4::HciCommand& cmd) {
  const Bytes& p = cmd.params;
  switch (cmd.opcode) {
    case hci::op::kSendLmpPdu:
      SendLmpPdu(cmd);
      return;
    case hci::op::kReadRam: {
      std::optional<Bytes> data;
      if (p.size() >= 5 && p[4] <= 250) data = memory_.ReadBlock(MemKind::kArm, GetLe32(p, 0), p[4]);
      if (!data) {
        CommandComplete(cmd.opcode, {hci::status::kInvalidParameters});
        return;
      }
      Bytes r{hci::status::kSuccess};
      r.insert(r.end(), data->begin(), data->end());
      CommandComplete(cmd.opcode, std::move(r));
      return;
    }
    case hci::op::kWriteRam: {
      bool ok = p.size() >= 5 &&
                memory_.WriteBlock(MemKind::kArm, GetLe32(p, 0), ByteView(p).subspan(4));
      CommandComplete(cmd.opcode, {ok ? hci::status::kSuccess : hci::status::kInvalidParameters});
      return;
    }
    case hci::op::kSuperDuperPeekPoke: {
      // op(1): 0 = peek, 1 = poke; address(4); value(1) for poke.
      if (p.size() < 5 || p[0] > 1 || (p[0] == 1 && p.size() < 6)) {
        CommandComplete(cmd.opcode, {hci::status::kInvalidParameters});
        return;
      }
      uint32_t address = GetLe32(p, 1);
      if (p[0] == 0) {
        auto value = memory_.Read(MemKind::kBlueRf, address);
        if (!value) {
          CommandComplete(cmd.opcode, {hci::status::kInvalidParameters});
          return;
        }
        CommandComplete(cmd.opcode, {hci::status::kSuccess, *value});
      } else {
        bool ok = memory_.Write(MemKind::kBlueRf, address, p[5]);
        CommandComplete(cmd.opcode, {ok ? hci::status::kSuccess : hci::status::kInvalidParameters});
      }
      return;
    }
    case hci::op::kFirewallControl:
      FirewallControl(cmd);
      return;
    default:
      Audit("unknown vendor command " + Hex4(cmd.opcode));
      CommandComplete(cmd.opcode, {hci::status::kUnknownCommand});
  }
}

void Controller::SendLmpPdu(const h4::HciCommand& cmd) {
  const Bytes& p = cmd.params;
  if (p.size() < 3) {
    CommandComplete(cmd.opcode, {hci::status::kInvalidParameters});
    return;
  }
  Connection* conn = FindConnection(GetLe16(p, 0));
  if (!conn || conn->transport != Transport::kClassic) {
    CommandComplete(cmd.opcode, {hci::status::kUnknownConnectionId});
    return;
  }
  if (conn->phase < Phase::kConnected) {
    CommandComplete(cmd.opcode, {hci::status::kCommandDisallowed});
    return;
  }
  Bytes pdu(p.begin() + 2, p.end());
  bool valid = pdu.size() <= ll::kMaxLmpPduSize;
  if (valid && !config_.unchecked_lmp_injection) {
    try {
      valid = std::holds_alternative<ll::LmpPdu>(ll::DissectLmp(pdu, false));
    } catch (const Error&) {
      valid = false;
    }
  }
  if (!valid) {
    Audit("SendLmpPdu rejected non-conformant PDU " + ToHex(pdu));
    CommandComplete(cmd.opcode, {hci::status::kInvalidParameters});
    return;
  }
  CommandComplete(cmd.opcode, {hci::status::kSuccess});
  SendLmp(*conn, pdu);
}

void Controller::FirewallControl(const h4::HciCommand& cmd) {
  // op(1): 0 = show, 1 = allow MAC, 2 = remove MAC, 3 = disable firewall.
  const Bytes& p = cmd.params;
  auto& allow = config_.profile.firewall_allowlist;
  uint8_t st = hci::status::kSuccess;
  if (p.empty() || p[0] > 3 || ((p[0] == 1 || p[0] == 2) && p.size() < 7)) {
    st = hci::status::kInvalidParameters;
  } else if (p[0] == 1) {
    if (!allow) allow.emplace();
    if (allow->size() >= kMaxAllowlist) {
      st = 0x07;  // memory capacity exceeded
    } else {
      allow->insert(BdAddr::FromLittleEndian(ByteView(p).subspan(1)));
    }
  } else if (p[0] == 2) {
    if (allow) allow->erase(BdAddr::FromLittleEndian(ByteView(p).subspan(1)));
  } else if (p[0] == 3) {
    allow.reset();
  }
  Bytes r{st, static_cast<uint8_t>(allow ? 1 : 0), static_cast<uint8_t>(allow ? allow->size() : 0)};
  if (allow) {
    for (const auto& mac : *allow) r.insert(r.end(), mac.octets.begin(), mac.octets.end());
  }
  CommandComplete(cmd.opcode, std::move(r));
}

void Controller::HandleAclFromHost(const h4::H4Frame& frame) {
  h4::AclPacket acl = h4::ParseAcl(frame);
  Connection* conn = FindConnection(acl.handle);
  if (!conn || conn->phase < Phase::kConnected) {
    Audit("ACL for unknown handle " + Hex4(acl.handle) + " dropped");
    return;
  }
  if (conn->transport == Transport::kClassic) ++stats_.br_tx;
  Transmit(conn->peer, conn->transport, AclPayload{acl.data});
  Emit(hci::NumberOfCompletedPackets(acl.handle, 1));
}

void Controller::CreateConnection(const BdAddr& peer, Transport transport, uint16_t opcode) {
  uint16_t handle = AllocateHandle();
  connections_[handle] = Connection{handle, peer, ll::Role::kMaster, transport};
  Transmit(peer, transport, PageRequest{});
  Schedule(kPageTimeout, [this, handle, opcode] {
    Connection* conn = FindConnection(handle);
    if (!conn || conn->phase != Phase::kPaging) return;
    BdAddr peer = conn->peer;
    connections_.erase(handle);
    Audit("page timeout towards " + peer.ToString());
    if (opcode == hci::op::kLeCreateConnection) {
      Emit(hci::LeConnectionComplete(0x3e, 0, 0, peer));
    } else {
      Emit(hci::ConnectionComplete(hci::status::kPageTimeout, 0, peer));
    }
  });
}

// ---------------------------------------------------------------------------
// Diagnostics

std::vector<DiagMessage> Controller::HandleDiag(const DiagMessage& msg) {
  CallScope scope(*this);
  if (diag::DiagDirection(msg.code) != Direction::kHostToController) {
    Audit(std::string("controller-bound diagnostic with host-bound code: ") +
          std::string(diag::DiagCodeName(msg.code)));
    return {};
  }
  ++stats_.diag_commands;
  if (const auto* t = std::get_if<diag::ToggleLmpLogging>(&msg.body)) {
    diag_log_enabled_ = t->enable;
    return {};
  }
  if (const auto* peek = std::get_if<diag::MemoryPeek>(&msg.body)) {
    auto value = memory_.Read(KindFor(peek->access), peek->address);
    return {{DiagCode::kPeekResponse, diag::PeekResponse{value.value_or(0), uint8_t(value ? 0 : 1)}}};
  }
  if (const auto* poke = std::get_if<diag::MemoryPoke>(&msg.body)) {
    bool ok = memory_.Write(KindFor(poke->access), poke->address, poke->value);
    return {{DiagCode::kPokeResponse, diag::PokeResponse{uint8_t(ok ? 0 : 1)}}};
  }
  if (const auto* dump = std::get_if<diag::MemoryHexdump>(&msg.body)) {
    diag::HexdumpResponse r{dump->address, {}};
    if (auto block = memory_.ReadBlock(MemKind::kArm, dump->address, diag::kHexdumpSize)) {
      std::copy(block->begin(), block->end(), r.data.begin());
    } else {
      Audit("hexdump at " + std::to_string(dump->address) + " touches unmapped memory; zero-filled");
      for (size_t i = 0; i < diag::kHexdumpSize; ++i) {
        r.data[i] = memory_.Read(MemKind::kArm, static_cast<uint32_t>(dump->address + i)).value_or(0);
      }
    }
    return {{DiagCode::kHexdumpResponse, r}};
  }
  if (const auto* run = std::get_if<diag::RunTest>(&msg.body)) {
    const auto& params = run->params;
    if (params.tx_frequency > diag::kMaxChannel || params.rx_frequency > diag::kMaxChannel ||
        params.payload_length > diag::kMaxTestPayloadLength) {
      return {{DiagCode::kTestCompleted, diag::TestCompleted{hci::status::kInvalidParameters, 0, 0, 0}}};
    }
    if (test_) {
      return {{DiagCode::kTestCompleted, diag::TestCompleted{hci::status::kCommandDisallowed, 0, 0, 0}}};
    }
    StartTest(params);
    return {};
  }
  if (diag::IsStatsRequest(msg.code)) return StatsFor(msg.code);
  return {};
}

std::vector<DiagMessage> Controller::StatsFor(DiagCode request) {
  switch (request) {
    case DiagCode::kResetBrAclStats:
      stats_.br_tx = stats_.br_rx = 0;
      [[fallthrough]];
    case DiagCode::kGetBrAclStats:
      return {diag::MakeStatsResponse(DiagCode::kBrAclStats, {stats_.br_tx, stats_.br_rx, 0, 0, 0})};
    case DiagCode::kGetEdrAclStats:
      return {diag::MakeStatsResponse(DiagCode::kEdrAclStats, {stats_.edr_tx, stats_.edr_rx, 0, 0, 0})};
    case DiagCode::kGetScoStats:
      return {diag::MakeStatsResponse(DiagCode::kScoStats, {stats_.sco_tx, stats_.sco_rx, 0})};
    case DiagCode::kGetEscoStats:
      return {diag::MakeStatsResponse(DiagCode::kEscoStats, {stats_.esco_tx, stats_.esco_rx, 0})};
    case DiagCode::kGetAuxStats:
      return {diag::MakeStatsResponse(DiagCode::kAuxResponse, {stats_.diag_commands})};
    case DiagCode::kGetConnectionStats: {
      std::vector<DiagMessage> out;
      for (const auto& [h, c] : connections_) {
        out.push_back(diag::MakeStatsResponse(
            DiagCode::kConnectionResponse,
            {h, c.peer.Low32(), static_cast<uint32_t>(c.role), static_cast<uint32_t>(c.phase)}));
      }
      uint32_t load = 1 + 4 * static_cast<uint32_t>(connections_.size()) + (dut_mode_ ? 60 : 0) +
                      (test_ ? 20 : 0);
      out.push_back(diag::MakeStatsResponse(DiagCode::kCpuLoadResponse, {std::min<uint32_t>(load, 100)}));
      return out;
    }
    default:
      return {};
  }
}

void Controller::StartTest(const diag::TestParams& params) {
  test_ = TestRun{params, 0, 0, port_ ? port_->FirstLinkedPeer() : std::nullopt};
  if (params.packet_count == 0) {
    FinishTest();
    return;
  }
  Schedule(kTestSlotTicks, [this] { TestStep(); });
}

void Controller::TestStep() {
  if (!test_) return;
  uint16_t seq = test_->sent++;
  if (test_->peer) {
    bool loopback = test_->params.scenario == diag::kTestScenarioAclLoopback ||
                    test_->params.scenario == diag::kTestScenarioSyncLoopback;
    Transmit(*test_->peer, Transport::kClassic, TestPacket{seq, loopback});
  }
  if (test_->sent < test_->params.packet_count) {
    Schedule(kTestSlotTicks, [this] { TestStep(); });
  } else {
    // Leave room for the last echo to come back.
    Schedule(kTestSlotTicks + 1, [this] { FinishTest(); });
  }
}

void Controller::FinishTest() {
  if (!test_) return;
  EmitDiag({DiagCode::kTestCompleted, diag::TestCompleted{0, test_->sent, 0, test_->received}});
  test_.reset();
}

// ---------------------------------------------------------------------------
// Air side

std::vector<h4::H4Frame> Controller::HandleAirFrame(const AirFrame& frame) {
  CallScope scope(*this);
  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, PageRequest>) {
          OnPage(frame);
        } else if constexpr (std::is_same_v<T, PageResponse>) {
          OnPageResponse(frame);
        } else if constexpr (std::is_same_v<T, ControlPdu>) {
          OnControlPdu(frame, body);
        } else if constexpr (std::is_same_v<T, AclPayload>) {
          OnAcl(frame, body);
        } else if constexpr (std::is_same_v<T, TestPacket>) {
          if (dut_mode_ && body.loopback) Transmit(frame.from, frame.transport, TestEcho{body.seq});
        } else if constexpr (std::is_same_v<T, TestEcho>) {
          if (test_) ++test_->received;
        } else if constexpr (std::is_same_v<T, LinkLoss>) {
          OnLinkLoss(frame);
        }
      },
      frame.body);
  return call_output_;
}

bool Controller::Blocked(const BdAddr& peer) const {
  const auto& allow = config_.profile.firewall_allowlist;
  return allow && !allow->contains(peer);
}

void Controller::OnPage(const AirFrame& frame) {
  if (dut_mode_) {
    Audit("page from " + frame.from.ToString() + " jammed (test mode)");
    return;
  }
  if (const Connection* existing = FindConnection(frame.from, frame.transport)) {
    // A firewalled peer may page again; its half-open link is reused, and
    // proceeds once the peer is no longer blocked.
    if (existing->phase != Phase::kPaging) {
      Audit("duplicate page from " + frame.from.ToString() + " ignored");
      return;
    }
    Connection& conn = *FindConnection(frame.from, frame.transport);
    if (!Blocked(frame.from)) conn.phase = Phase::kLmpSetup;
    Transmit(frame.from, frame.transport, PageResponse{});
    if (conn.phase == Phase::kLmpSetup) AdvanceSetup(conn);
    return;
  }
  uint16_t handle = AllocateHandle();
  Connection& conn = connections_[handle] =
      Connection{handle, frame.from, ll::Role::kSlave, frame.transport};
  if (Blocked(frame.from)) {
    Audit("firewall: connection from " + frame.from.ToString() + " held in paging");
  } else {
    conn.phase = Phase::kLmpSetup;
  }
  Transmit(frame.from, frame.transport, PageResponse{});
  if (conn.phase == Phase::kLmpSetup) AdvanceSetup(conn);
}

void Controller::OnPageResponse(const AirFrame& frame) {
  Connection* conn = FindConnection(frame.from, frame.transport);
  if (!conn || conn->role != ll::Role::kMaster || conn->phase != Phase::kPaging) return;
  conn->phase = Phase::kLmpSetup;
  AdvanceSetup(*conn);
}

void Controller::OnControlPdu(const AirFrame& frame, const ControlPdu& pdu) {
  if (dut_mode_) {
    Audit("control PDU from " + frame.from.ToString() + " jammed (test mode)");
    return;
  }
  Connection* conn = FindConnection(frame.from, frame.transport);
  if (frame.transport == Transport::kClassic) {
    OnLmp(conn, frame.from, pdu.raw);
  } else {
    OnLcp(conn, frame.from, pdu.raw);
  }
}

void Controller::LogLmp(bool sent, const BdAddr& peer, ByteView raw) {
  if (!diag_log_enabled_) return;
  diag::LmpLogRecord rec;
  rec.low_mac = peer.Low4();
  if (sent) {
    std::copy_n(raw.begin(), std::min(raw.size(), rec.payload.size()), rec.payload.begin());
  } else {
    // Received records always report 17 octets: the receive buffer, whose
    // tail still holds bytes of earlier, longer PDUs.
    rec.payload = rx_buffer_;
  }
  EmitDiag({sent ? DiagCode::kLmpSent : DiagCode::kLmpReceived, rec});
}

void Controller::LogLcp(bool sent, const BdAddr& peer, ByteView raw) {
  if (!diag_log_enabled_) return;
  EmitDiag({sent ? DiagCode::kLcpSent : DiagCode::kLcpReceived,
            diag::LcpLogRecord{peer, Bytes(raw.begin(), raw.end())}});
}

void Controller::SendLmp(Connection& conn, const Bytes& raw) {
  LogLmp(true, conn.peer, raw);
  Transmit(conn.peer, Transport::kClassic, ControlPdu{raw});
}

void Controller::SendLmp(Connection& conn, const ll::LinkPdu& pdu) {
  SendLmp(conn, ll::BuildLmp(pdu, /*allow_nonconformant=*/true));
}

void Controller::SendLcp(Connection& conn, const ll::LcpPdu& pdu) {
  Bytes raw = ll::BuildLcp(pdu, /*allow_nonconformant=*/true);
  LogLcp(true, conn.peer, raw);
  Transmit(conn.peer, Transport::kLe, ControlPdu{raw});
}

void Controller::SendNotAccepted(const BdAddr& to, ByteView raw, uint8_t error) {
  Connection* conn = FindConnection(to, Transport::kClassic);
  if (!conn) return;
  uint8_t tid = raw[0] & 1;
  uint8_t opcode = raw[0] >> 1;
  if (opcode >= ll::kFirstEscapeOpcode && raw.size() >= 2) {
    SendLmp(*conn, ll::MakeLmp("LMP_not_accepted_ext", tid, {opcode, raw[1], error}));
  } else {
    SendLmp(*conn, ll::MakeLmp("LMP_not_accepted", tid, {opcode, error}));
  }
}

void Controller::OnLmp(Connection* conn, const BdAddr& from, ByteView raw) {
  if (raw.empty()) {
    Audit("empty LMP PDU from " + from.ToString());
    return;
  }
  std::copy_n(raw.begin(), std::min(raw.size(), rx_buffer_.size()), rx_buffer_.begin());
  LogLmp(false, from, raw);

  uint8_t opcode = raw[0] >> 1;
  bool is_rejection = opcode == ll::kLmpNotAccepted ||
                      (opcode == ll::kLmpEscape4 && raw.size() > 1 && raw[1] == ll::kLmpExtNotAccepted);
  if (!conn) {
    Audit("LMP from unconnected peer " + from.ToString() + " dropped");
    return;
  }
  if (conn->role == ll::Role::kSlave && Blocked(from)) {
    Audit("firewall: LMP " + ToHex(raw) + " from " + from.ToString() + " refused");
    if (!is_rejection) SendNotAccepted(from, raw, ll::kErrorPduNotAllowed);
    return;
  }

  ll::LinkPdu pdu;
  try {
    pdu = ll::DissectLmp(raw, /*padded_to_17=*/false);
  } catch (const Error& e) {
    Audit(std::string("non-conformant LMP from ") + from.ToString() + ": " + e.what());
    if (!is_rejection) {
      SendNotAccepted(from, raw,
                      e.kind() == ErrorKind::kUnknownOpcode ? hci::status::kUnknownLmpPdu
                                                            : hci::status::kInvalidLmpParameters);
    }
    return;
  }
  if (const auto* bpcs = std::get_if<ll::BpcsPdu>(&pdu)) {
    OnBpcs(*conn, *bpcs);
    return;
  }
  conn->last_rx_opcode = opcode;
  const auto& lmp = std::get<ll::LmpPdu>(pdu);
  std::string_view name = ll::LmpName(lmp);
  if (conn->phase == Phase::kLmpSetup && MatchesSetupStep(*conn, name)) {
    ++conn->setup_step;
    AdvanceSetup(*conn);
    return;
  }
  if (conn->phase < Phase::kLmpSetup) {
    Audit("LMP " + std::string(name) + " before paging completed; ignored");
    return;
  }

  switch (lmp.opcode) {
    case ll::kLmpNotAccepted:
      Audit("peer refused LMP opcode " + Hex2(lmp.params[0]) + " with error " + Hex2(lmp.params[1]));
      if (conn->phase == Phase::kLmpSetup && conn->role == ll::Role::kMaster) {
        DropConnection(conn->handle, lmp.params[1], /*notify_peer=*/false);
      }
      return;
    case ll::kLmpDetach:
      DropConnection(conn->handle, lmp.params[0], /*notify_peer=*/false);
      return;
    case ll::kLmpStartEncryptionReq:
      if (conn->phase == Phase::kSspPending && !conn->SspComplete()) {
        if (config_.profile.encryption_order_check) {
          Audit("start_encryption_req before pairing finished refused");
          SendNotAccepted(from, raw, ll::kErrorPduNotAllowed);
          return;
        }
        Crash("start_encryption_req during pending SSP: fault in bignum_xormod");
        return;
      }
      if (conn->phase == Phase::kSspPending) {
        conn->phase = Phase::kEncrypted;
        SendLmp(*conn, ll::MakeLmp("LMP_accepted", lmp.tid, {ll::kLmpStartEncryptionReq}));
        Emit(hci::EncryptionChange(hci::status::kSuccess, conn->handle, true));
        return;
      }
      SendNotAccepted(from, raw, ll::kErrorPduNotAllowed);
      return;
    case ll::kLmpAccepted:
      if (lmp.params[0] == ll::kLmpStartEncryptionReq && conn->encryption_requested) {
        conn->encryption_requested = false;
        conn->phase = Phase::kEncrypted;
        Emit(hci::EncryptionChange(hci::status::kSuccess, conn->handle, true));
      }
      return;
    case ll::kLmpDhkeyCheck:
      if (conn->phase == Phase::kSspPending) {
        conn->remote_confirmed = true;
        CheckPairingComplete(*conn);
      }
      return;
    case ll::kLmpFeaturesReq:
      SendLmp(*conn, ll::MakeLmp("LMP_features_res", lmp.tid, Bytes(std::begin(kLmpFeatures), std::end(kLmpFeatures))));
      return;
    case ll::kLmpVersionReq: {
      Bytes v{config_.lmp_version};
      PutLe16(v, hci::kBroadcomCompanyId);
      PutLe16(v, config_.lmp_subversion);
      SendLmp(*conn, ll::MakeLmp("LMP_version_res", lmp.tid, v));
      return;
    }
    case ll::kLmpEscape4:
      if (lmp.extended_opcode == ll::kLmpExtIoCapabilityReq) {
        if (conn->phase != Phase::kConnected) {
          SendNotAccepted(from, raw, ll::kErrorPduNotAllowed);
          return;
        }
        conn->phase = Phase::kSspPending;
        SendLmp(*conn, ll::MakeLmp("LMP_IO_capability_res", lmp.tid, {0x01, 0x00, 0x03}));
        Emit(hci::UserConfirmationRequest(conn->peer, NumericValue(*conn)));
        return;
      }
      if (lmp.extended_opcode == ll::kLmpExtIoCapabilityRes && conn->phase == Phase::kSspPending) {
        Emit(hci::UserConfirmationRequest(conn->peer, NumericValue(*conn)));
        return;
      }
      if (lmp.extended_opcode == ll::kLmpExtNotAccepted) {
        Audit("peer refused extended LMP opcode " + Hex2(lmp.params[1]));
        return;
      }
      break;
    default:
      break;
  }
  Audit("unhandled LMP " + std::string(name) + " from " + from.ToString());
}

void Controller::OnBpcs(Connection& conn, const ll::BpcsPdu& pdu) {
  if (conn.phase < Phase::kLmpSetup) {
    Audit("BPCS before paging completed; ignored");
    return;
  }
  if (pdu.conformant()) {
    switch (static_cast<ll::BpcsSubtype>(pdu.subtype)) {
      case ll::BpcsSubtype::kFeaturesRequest:
        SendLmp(conn, ll::BpcsPdu{pdu.tid, static_cast<uint8_t>(ll::BpcsSubtype::kFeaturesResponse),
                                  Bytes(std::begin(kBpcsFeatures), std::end(kBpcsFeatures))});
        break;
      case ll::BpcsSubtype::kBfcSuspend:
      case ll::BpcsSubtype::kBfcResumeReqResp:
        SendLmp(conn, ll::BpcsPdu{pdu.tid, static_cast<uint8_t>(ll::BpcsSubtype::kBpcsAccept), {}});
        break;
      default:
        break;
    }
    return;
  }
  Audit("BPCS subtype " + Hex2(pdu.subtype) + " beyond handler table");
  if (config_.profile.bpcs_bounds_check) {
    SendLmp(conn, ll::BpcsPdu{pdu.tid, static_cast<uint8_t>(ll::BpcsSubtype::kNotAccept), {pdu.subtype}});
    return;
  }
  switch (config_.profile.OverflowAction(pdu.subtype)) {
    case HandlerAction::kDutMode:
      EnterDutMode(/*unsolicited=*/true);
      return;
    case HandlerAction::kCrash:
      Crash("BPCS subtype " + Hex2(pdu.subtype) + " jumped to an invalid handler");
      return;
    case HandlerAction::kNop:
      return;
  }
}

void Controller::OnLcp(Connection* conn, const BdAddr& from, ByteView raw) {
  if (raw.empty()) {
    Audit("empty LCP PDU from " + from.ToString());
    return;
  }
  LogLcp(false, from, raw);
  uint8_t opcode = raw[0];
  bool is_rejection = opcode == ll::kLlRejectInd || opcode == ll::kLlRejectExtInd ||
                      opcode == ll::kLlUnknownRsp;
  if (!conn) {
    Audit("LCP from unconnected peer " + from.ToString() + " dropped");
    return;
  }
  if (conn->role == ll::Role::kSlave && Blocked(from)) {
    Audit("firewall: LCP " + ToHex(raw) + " from " + from.ToString() + " refused");
    if (!is_rejection) SendLcp(*conn, ll::MakeLcp("LL_REJECT_EXT_IND", {opcode, ll::kErrorPduNotAllowed}));
    return;
  }
  ll::LcpPdu pdu;
  try {
    pdu = ll::DissectLcp(raw);
  } catch (const Error& e) {
    Audit(std::string("non-conformant LCP from ") + from.ToString() + ": " + e.what());
    if (!is_rejection) SendLcp(*conn, ll::MakeLcp("LL_UNKNOWN_RSP", {opcode}));
    return;
  }
  const ll::OpcodeEntry* entry = ll::OpcodeTable::Lcp().Find(pdu.opcode);
  std::string_view name = entry ? std::string_view(entry->name) : std::string_view();
  if (conn->phase == Phase::kLmpSetup && MatchesSetupStep(*conn, name)) {
    ++conn->setup_step;
    AdvanceSetup(*conn);
    return;
  }
  if (conn->phase < Phase::kLmpSetup) return;
  switch (pdu.opcode) {
    case ll::kLlTerminateInd:
      DropConnection(conn->handle, pdu.params[0], /*notify_peer=*/false);
      return;
    case ll::kLlRejectExtInd:
      if (conn->phase == Phase::kLmpSetup && conn->role == ll::Role::kMaster) {
        DropConnection(conn->handle, pdu.params[1], /*notify_peer=*/false);
      }
      return;
    case ll::kLlFeatureReq:
      SendLcp(*conn, ll::MakeLcp("LL_FEATURE_RSP", Bytes(std::begin(kLeFeatures), std::end(kLeFeatures))));
      return;
    default:
      Audit("unhandled LCP " + std::string(name) + " from " + from.ToString());
  }
}

void Controller::OnAcl(const AirFrame& frame, const AclPayload& acl) {
  if (dut_mode_) {
    Audit("ACL from " + frame.from.ToString() + " jammed (test mode)");
    return;
  }
  Connection* conn = FindConnection(frame.from, frame.transport);
  if (!conn || conn->phase < Phase::kConnected) {
    Audit("ACL from " + frame.from.ToString() + " without an established link dropped");
    return;
  }
  if (conn->transport == Transport::kClassic) ++stats_.br_rx;
  Emit(h4::MakeAclFrame(conn->handle, acl.data));
}

void Controller::OnLinkLoss(const AirFrame& frame) {
  if (const Connection* conn = FindConnection(frame.from, frame.transport)) {
    DropConnection(conn->handle, hci::status::kConnectionTimeout, /*notify_peer=*/false);
  }
}

// ---------------------------------------------------------------------------
// Connection life cycle

const std::vector<SetupStep>& Controller::ScriptFor(Transport transport) const {
  static const std::vector<SetupStep> classic = ParseSetupScript(ll::ConnectionSetupScriptText());
  static const std::vector<SetupStep> le = ParseSetupScript(ll::LeConnectionSetupScriptText());
  return transport == Transport::kClassic ? classic : le;
}

bool Controller::MatchesSetupStep(const Connection& conn, std::string_view name) const {
  const auto& script = ScriptFor(conn.transport);
  if (conn.setup_step >= script.size()) return false;
  const SetupStep& step = script[conn.setup_step];
  bool from_master = conn.role == ll::Role::kSlave;
  return step.by_master == from_master && step.pdu == name;
}

Bytes Controller::SetupParams(const Connection& conn, const SetupStep& step) const {
  if (step.params) return *step.params;
  const std::string& n = step.pdu;
  if (n == "LMP_features_req" || n == "LMP_features_res") {
    return Bytes(std::begin(kLmpFeatures), std::end(kLmpFeatures));
  }
  if (n == "LMP_features_req_ext" || n == "LMP_features_res_ext") {
    return Bytes(std::begin(kLmpFeaturesPage1), std::end(kLmpFeaturesPage1));
  }
  if (n == "LMP_version_req" || n == "LMP_version_res" || n == "LL_VERSION_IND") {
    Bytes v{n == "LL_VERSION_IND" ? uint8_t{0x09} : config_.lmp_version};
    PutLe16(v, hci::kBroadcomCompanyId);
    PutLe16(v, config_.lmp_subversion);
    return v;
  }
  if (n == "LMP_accepted") return {conn.last_rx_opcode};
  if (n == "LL_FEATURE_REQ" || n == "LL_FEATURE_RSP") {
    return Bytes(std::begin(kLeFeatures), std::end(kLeFeatures));
  }
  const auto& table = conn.transport == Transport::kClassic ? ll::OpcodeTable::Lmp() : ll::OpcodeTable::Lcp();
  const ll::OpcodeEntry* entry = table.FindByName(n);
  return Bytes(entry ? entry->param_length : 0, 0);
}

void Controller::AdvanceSetup(Connection& conn) {
  const auto& script = ScriptFor(conn.transport);
  bool master = conn.role == ll::Role::kMaster;
  while (conn.setup_step < script.size() && script[conn.setup_step].by_master == master) {
    const SetupStep& step = script[conn.setup_step];
    Bytes params = SetupParams(conn, step);
    if (conn.transport == Transport::kClassic) {
      ll::Role initiator = IsResponseName(step.pdu) ? (master ? ll::Role::kSlave : ll::Role::kMaster) : conn.role;
      SendLmp(conn, ll::MakeLmp(step.pdu, ll::DefaultTid(initiator), std::move(params)));
    } else if (step.pdu == "LL_VENDOR") {
      if (params.empty()) throw Error(ErrorKind::kParse, "LL_VENDOR setup step needs a subtype");
      SendLcp(conn, ll::MakeVendorLcp(static_cast<ll::VendorLcpSubtype>(params[0]),
                                      Bytes(params.begin() + 1, params.end())));
    } else {
      SendLcp(conn, ll::MakeLcp(step.pdu, std::move(params)));
    }
    ++conn.setup_step;
  }
  if (conn.setup_step == script.size()) CompleteSetup(conn);
}

void Controller::CompleteSetup(Connection& conn) {
  conn.phase = Phase::kConnected;
  if (conn.transport == Transport::kClassic) {
    Emit(hci::ConnectionComplete(hci::status::kSuccess, conn.handle, conn.peer));
  } else {
    Emit(hci::LeConnectionComplete(hci::status::kSuccess, conn.handle,
                                   conn.role == ll::Role::kMaster ? 0 : 1, conn.peer));
  }
}

void Controller::CheckPairingComplete(Connection& conn) {
  if (conn.SspComplete()) Emit(hci::SimplePairingComplete(hci::status::kSuccess, conn.peer));
}

uint32_t Controller::NumericValue(const Connection& conn) const {
  uint32_t a = config_.mac.Low32();
  uint32_t b = conn.peer.Low32();
  uint64_t mix = (static_cast<uint64_t>(std::min(a, b)) << 32) | std::max(a, b);
  mix ^= mix >> 29;
  mix *= 0xbf58476d1ce4e5b9ull;
  mix ^= mix >> 32;
  return static_cast<uint32_t>(mix % 1000000);
}

void Controller::EnterDutMode(bool unsolicited) {
  dut_mode_ = true;
  Audit("entered device under test mode");
  // The overflowed BPCS handler runs the HCI command handler, which answers
  // as if the host had asked.
  if (unsolicited) CommandComplete(hci::op::kEnableDeviceUnderTestMode, {hci::status::kSuccess});
}

void Controller::Crash(const std::string& why) {
  ++crash_count_;
  Audit("CRASH: " + why);
  Emit(hci::HardwareError(0x00));
  Reset();
}

void Controller::DropConnection(uint16_t handle, uint8_t reason, bool notify_peer) {
  Connection* conn = FindConnection(handle);
  if (!conn) return;
  if (notify_peer) {
    if (conn->transport == Transport::kClassic) {
      SendLmp(*conn, ll::MakeLmp("LMP_detach", ll::DefaultTid(conn->role), {reason}));
    } else {
      SendLcp(*conn, ll::MakeLcp("LL_TERMINATE_IND", {reason}));
    }
  }
  Connection gone = *conn;
  connections_.erase(handle);
  if (gone.phase >= Phase::kConnected) {
    Emit(hci::DisconnectionComplete(handle, reason));
  } else if (gone.role == ll::Role::kMaster) {
    if (gone.transport == Transport::kClassic) {
      Emit(hci::ConnectionComplete(reason, 0, gone.peer));
    } else {
      Emit(hci::LeConnectionComplete(reason, 0, 0, gone.peer));
    }
  }
}

}  // namespace btdiag::emu
