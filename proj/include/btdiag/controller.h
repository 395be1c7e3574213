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

// Behavioural model of a Broadcom Bluetooth controller.
//
// A Controller consumes H4 frames from its host and air frames from linked
// peers, and produces H4 frames towards its host. It never blocks and never
// reads a wall clock: time is the tick count of the AirPort it is attached to
// (one tick per 625 us baseband slot). Instances are not thread safe; a
// Simulation feeds each one strictly serially.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "btdiag/common.h"
#include "btdiag/diag.h"
#include "btdiag/h4.h"
#include "btdiag/ll.h"
#include "btdiag/memory.h"

namespace btdiag::emu {

using Tick = uint64_t;

enum class Transport : uint8_t { kClassic, kLe };

enum class Phase : uint8_t {
  kPaging,
  kLmpSetup,
  kConnected,
  kSspPending,
  kEncrypted,
};
std::string_view PhaseName(Phase phase);

enum class HandlerAction : uint8_t { kDutMode, kCrash, kNop };

struct SecurityProfile {
  bool bpcs_bounds_check = false;
  bool encryption_order_check = false;
  std::optional<std::set<BdAddr>> firewall_allowlist;
  // Behaviour of out-of-range BPCS subtypes when the bounds check is off.
  // Subtypes missing from the map fall back to `bpcs_overflow_default`.
  std::map<uint8_t, HandlerAction> bpcs_overflow_map{{ll::kBpcsEnableDutSubtype, HandlerAction::kDutMode}};
  HandlerAction bpcs_overflow_default = HandlerAction::kCrash;

  static SecurityProfile Vulnerable();
  static SecurityProfile Patched();
  HandlerAction OverflowAction(uint8_t subtype) const;
  bool operator==(const SecurityProfile&) const = default;
};

struct ControllerConfig {
  std::string name = "ctrl";
  BdAddr mac;
  SecurityProfile profile = SecurityProfile::Vulnerable();
  uint64_t seed = 1;
  uint8_t hci_version = 0x07;
  uint16_t hci_revision = 0x6109;
  uint8_t lmp_version = 0x07;
  uint16_t lmp_subversion = 0x4109;
  // Models an attacker whose firmware is patched to skip the SendLmpPdu
  // opcode/length validation.
  bool unchecked_lmp_injection = false;
  // Memory files applied on top of the default map at construction and reset.
  struct MemoryLoad {
    MemKind kind;
    uint32_t base;
    std::string path;
  };
  std::vector<MemoryLoad> memory_loads;
};

struct Connection {
  uint16_t handle = 0;
  BdAddr peer;
  ll::Role role = ll::Role::kMaster;
  Transport transport = Transport::kClassic;
  Phase phase = Phase::kPaging;
  size_t setup_step = 0;
  bool local_confirmed = false;
  bool remote_confirmed = false;
  bool encryption_requested = false;
  uint8_t last_rx_opcode = 0;

  bool SspComplete() const { return local_confirmed && remote_confirmed; }
  bool operator==(const Connection&) const = default;
};

// Air-side vocabulary. LMP/LCP travel as raw octets, exactly as a sender
// built them; receivers dissect.
struct PageRequest {
  bool operator==(const PageRequest&) const = default;
};
struct PageResponse {
  bool operator==(const PageResponse&) const = default;
};
struct ControlPdu {
  Bytes raw;
  bool operator==(const ControlPdu&) const = default;
};
struct AclPayload {
  Bytes data;
  bool operator==(const AclPayload&) const = default;
};
struct TestPacket {
  uint16_t seq = 0;
  bool loopback = false;
  bool operator==(const TestPacket&) const = default;
};
struct TestEcho {
  uint16_t seq = 0;
  bool operator==(const TestEcho&) const = default;
};
struct LinkLoss {
  bool operator==(const LinkLoss&) const = default;
};

using AirBody =
    std::variant<PageRequest, PageResponse, ControlPdu, AclPayload, TestPacket, TestEcho, LinkLoss>;

struct AirFrame {
  BdAddr from;
  BdAddr to;
  Transport transport = Transport::kClassic;
  AirBody body;
  bool operator==(const AirFrame&) const = default;
};

// What a controller needs from its surroundings.
class AirPort {
 public:
  virtual ~AirPort() = default;
  virtual Tick Now() const = 0;
  // Returns false when no link reaches `frame.to`.
  virtual bool Transmit(const AirFrame& frame) = 0;
  virtual void Schedule(Tick delay, std::function<void()> callback) = 0;
  virtual std::optional<BdAddr> FirstLinkedPeer() const = 0;
};

// Statistics kept per controller. BR ACL counters are the only ones traffic
// moves; the others exist so every getter has something to report.
struct Stats {
  uint32_t br_tx = 0;
  uint32_t br_rx = 0;
  uint32_t edr_tx = 0;
  uint32_t edr_rx = 0;
  uint32_t sco_tx = 0;
  uint32_t sco_rx = 0;
  uint32_t esco_tx = 0;
  uint32_t esco_rx = 0;
  uint32_t diag_commands = 0;
  bool operator==(const Stats&) const = default;
};

// Everything that defines observable controller behaviour, for equality
// checks (clock, RNG and audit log excluded).
struct ControllerSnapshot {
  BdAddr mac;
  SecurityProfile profile;
  std::vector<Connection> connections;
  bool diag_log_enabled = false;
  bool dut_mode = false;
  bool test_running = false;
  Stats stats;
  MemoryImage memory;
  bool operator==(const ControllerSnapshot&) const = default;
};

struct SetupStep {
  bool by_master = true;
  std::string pdu;
  std::optional<Bytes> params;
};
std::vector<SetupStep> ParseSetupScript(std::string_view text);

class Controller {
 public:
  static constexpr uint16_t kFirstHandle = 0x000b;
  static constexpr uint16_t kMaxHandle = 0x0eff;
  static constexpr Tick kPageTimeout = 0x2000;
  static constexpr Tick kTestSlotTicks = 2;

  explicit Controller(ControllerConfig config);

  void Attach(AirPort* port) { port_ = port; }
  void SetHostSink(std::function<void(const h4::H4Frame&)> sink) { host_sink_ = std::move(sink); }

  // Each handler returns the H4 frames emitted towards the host during the
  // call; the same frames also go to the host sink.
  std::vector<h4::H4Frame> HandleHostFrame(const h4::H4Frame& frame);
  std::vector<diag::DiagMessage> HandleDiag(const diag::DiagMessage& msg);
  std::vector<h4::H4Frame> HandleAirFrame(const AirFrame& frame);

  // Drops all volatile state as if the chip had rebooted.
  void Reset();

  const ControllerConfig& config() const { return config_; }
  const BdAddr& mac() const { return config_.mac; }
  const SecurityProfile& profile() const { return config_.profile; }
  bool diag_log_enabled() const { return diag_log_enabled_; }
  bool dut_mode() const { return dut_mode_; }
  const Stats& stats() const { return stats_; }
  const MemoryImage& memory() const { return memory_; }
  const std::map<uint16_t, Connection>& connections() const { return connections_; }
  const Connection* FindConnection(const BdAddr& peer, Transport transport) const;
  const std::vector<std::string>& audit_log() const { return audit_; }
  uint32_t crash_count() const { return crash_count_; }
  ControllerSnapshot Snapshot() const;

  // Air frames transmitted during the last handler call; useful when the
  // controller is driven without a Simulation.
  const std::vector<AirFrame>& last_air_output() const { return air_out_; }

 private:
  struct TestRun {
    diag::TestParams params;
    uint16_t sent = 0;
    uint16_t received = 0;
    std::optional<BdAddr> peer;
  };

  class CallScope;

  Tick Now() const;
  void Emit(h4::H4Frame frame);
  void EmitDiag(const diag::DiagMessage& msg);
  void Audit(std::string text);
  void Transmit(const BdAddr& to, Transport transport, AirBody body);
  void Schedule(Tick delay, std::function<void()> callback);

  // HCI
  void HandleCommand(const h4::HciCommand& cmd);
  void HandleVendorCommand(const h4::HciCommand& cmd);
  void HandleAclFromHost(const h4::H4Frame& frame);
  void CommandComplete(uint16_t opcode, Bytes params);
  void CreateConnection(const BdAddr& peer, Transport transport, uint16_t opcode);
  void SendLmpPdu(const h4::HciCommand& cmd);
  void FirewallControl(const h4::HciCommand& cmd);

  // Diagnostics
  void StartTest(const diag::TestParams& params);
  void TestStep();
  void FinishTest();
  std::vector<diag::DiagMessage> StatsFor(diag::DiagCode request);

  // Air
  void OnPage(const AirFrame& frame);
  void OnPageResponse(const AirFrame& frame);
  void OnControlPdu(const AirFrame& frame, const ControlPdu& pdu);
  void OnLmp(Connection* conn, const BdAddr& from, ByteView raw);
  void OnLcp(Connection* conn, const BdAddr& from, ByteView raw);
  void OnBpcs(Connection& conn, const ll::BpcsPdu& pdu);
  void OnAcl(const AirFrame& frame, const AclPayload& acl);
  void OnLinkLoss(const AirFrame& frame);

  bool Blocked(const BdAddr& peer) const;
  void SendLmp(Connection& conn, const Bytes& raw);
  void SendLmp(Connection& conn, const ll::LinkPdu& pdu);
  void SendLcp(Connection& conn, const ll::LcpPdu& pdu);
  void SendNotAccepted(const BdAddr& to, ByteView raw, uint8_t error);
  void LogLmp(bool sent, const BdAddr& peer, ByteView raw);
  void LogLcp(bool sent, const BdAddr& peer, ByteView raw);

  void AdvanceSetup(Connection& conn);
  bool MatchesSetupStep(const Connection& conn, std::string_view name) const;
  Bytes SetupParams(const Connection& conn, const SetupStep& step) const;
  void CompleteSetup(Connection& conn);
  void CheckPairingComplete(Connection& conn);
  void EnterDutMode(bool unsolicited);
  void Crash(const std::string& why);
  void DropConnection(uint16_t handle, uint8_t reason, bool notify_peer);
  Connection* FindConnection(const BdAddr& peer, Transport transport);
  Connection* FindConnection(uint16_t handle);
  uint16_t AllocateHandle();
  const std::vector<SetupStep>& ScriptFor(Transport transport) const;
  uint32_t NumericValue(const Connection& conn) const;

  ControllerConfig config_;
  AirPort* port_ = nullptr;
  std::function<void(const h4::H4Frame&)> host_sink_;

  std::map<uint16_t, Connection> connections_;
  bool diag_log_enabled_ = false;
  bool dut_mode_ = false;
  MemoryImage memory_;
  Stats stats_;
  std::optional<TestRun> test_;
  uint16_t next_handle_ = kFirstHandle;
  std::array<uint8_t, diag::kLmpRecordPayloadSize> rx_buffer_{};
  uint64_t epoch_ = 0;
  uint32_t crash_count_ = 0;
  std::mt19937_64 rng_;
  std::vector<std::string> audit_;

  int call_depth_ = 0;
  std::vector<h4::H4Frame> call_output_;
  std::vector<AirFrame> air_out_;
};

}  // namespace btdiag::emu
