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

// Broadcom diagnostic messages: the body of H4 type 0x07 frames.
//
// Every message starts with a one-octet code. Addresses are 32-bit
// little-endian. Bodies never include the H4 tag or the zero padding of the
// 64-octet envelope; ParseDiag strips that padding and rejects nonzero junk
// after a fixed-size body.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "btdiag/common.h"
#include "btdiag/h4.h"

namespace btdiag::diag {

enum class DiagCode : uint8_t {
  kLmpSent = 0x00,
  kLmpReceived = 0x01,
  kPeekResponse = 0x03,
  kHexdumpResponse = 0x04,
  kTestCompleted = 0x0a,
  kPokeResponse = 0x11,
  kCpuLoadResponse = 0x15,
  kBrAclStats = 0x16,
  kEdrAclStats = 0x17,
  kAuxResponse = 0x18,
  kScoStats = 0x1a,
  kEscoStats = 0x1b,
  kConnectionResponse = 0x1f,
  kLcpSent = 0x80,
  kLcpReceived = 0x81,
  kResetBrAclStats = 0xb9,
  kGetBrAclStats = 0xc1,
  kGetEdrAclStats = 0xc2,
  kGetAuxStats = 0xc3,
  kGetScoStats = 0xc5,
  kGetEscoStats = 0xc6,
  kGetConnectionStats = 0xcf,
  kToggleLmpLogging = 0xf0,
  kMemoryPeek = 0xf1,
  kMemoryPoke = 0xf2,
  kMemoryHexdump = 0xf3,
  kRunTest = 0xf6,
};

// All 27 codes, in numeric order.
std::span<const DiagCode> AllDiagCodes();
std::optional<DiagCode> DiagCodeFromOctet(uint8_t octet);
std::string_view DiagCodeName(DiagCode code);
Direction DiagDirection(DiagCode code);

enum class MemAccessType : uint8_t {
  kArm = 0x02,
  kBlueRf = 0x03,
  kHexdumpArm = 0x04,
};

inline constexpr size_t kLmpRecordPayloadSize = 17;
inline constexpr size_t kHexdumpSize = 32;
inline constexpr uint8_t kMaxChannel = 78;
inline constexpr uint16_t kMaxTestPayloadLength = 1021;

struct ToggleLmpLogging {
  bool enable = false;
  bool operator==(const ToggleLmpLogging&) const = default;
};

struct MemoryPeek {
  MemAccessType access = MemAccessType::kArm;
  uint32_t address = 0;
  bool operator==(const MemoryPeek&) const = default;
};

struct MemoryPoke {
  MemAccessType access = MemAccessType::kArm;
  uint32_t address = 0;
  uint8_t value = 0;
  bool operator==(const MemoryPoke&) const = default;
};

// Wire form always carries access type 0x04.
struct MemoryHexdump {
  uint32_t address = 0;
  bool operator==(const MemoryHexdump&) const = default;
};

// `status` trails the value so that a bare `03 vv` response parses with
// status 0.
struct PeekResponse {
  uint8_t value = 0;
  uint8_t status = 0;
  bool operator==(const PeekResponse&) const = default;
};

struct PokeResponse {
  uint8_t status = 0;
  bool operator==(const PokeResponse&) const = default;
};

struct HexdumpResponse {
  uint32_t address = 0;
  std::array<uint8_t, kHexdumpSize> data{};
  bool operator==(const HexdumpResponse&) const = default;
};

// Loosely follows LMP_test_control. `packet_count` is the number of test
// packets to transmit before reporting TestCompleted.
struct TestParams {
  uint8_t scenario = 0;
  uint8_t hopping_mode = 0;
  uint8_t tx_frequency = 0;
  uint8_t rx_frequency = 0;
  uint8_t power_level = 0;
  uint8_t packet_type = 0;
  uint16_t payload_length = 0;
  uint16_t packet_count = 0;
  bool operator==(const TestParams&) const = default;
};

// Test scenario octets shared with LMP_test_control.
inline constexpr uint8_t kTestScenarioAclLoopback = 0x05;
inline constexpr uint8_t kTestScenarioSyncLoopback = 0x06;

struct RunTest {
  TestParams params;
  bool operator==(const RunTest&) const = default;
};

struct TestCompleted {
  uint8_t status = 0;
  uint16_t tx_count = 0;
  uint16_t reserved = 0;
  uint16_t rx_count = 0;
  bool operator==(const TestCompleted&) const = default;
};

struct LmpLogRecord {
  std::array<uint8_t, 4> low_mac{};
  std::array<uint8_t, kLmpRecordPayloadSize> payload{};
  bool operator==(const LmpLogRecord&) const = default;
};

struct LcpLogRecord {
  BdAddr mac;
  Bytes payload;
  bool operator==(const LcpLogRecord&) const = default;
};

struct StatsCounters {
  DiagCode kind = DiagCode::kBrAclStats;
  std::vector<uint32_t> values;
  bool operator==(const StatsCounters&) const = default;
};

struct StatsResponse {
  StatsCounters counters;
  bool operator==(const StatsResponse&) const = default;
};

struct StatsRequest {
  bool operator==(const StatsRequest&) const = default;
};

using DiagBody = std::variant<ToggleLmpLogging, MemoryPeek, MemoryPoke, MemoryHexdump,
                              PeekResponse, PokeResponse, HexdumpResponse, RunTest,
                              TestCompleted, LmpLogRecord, LcpLogRecord, StatsResponse,
                              StatsRequest>;

struct DiagMessage {
  DiagCode code = DiagCode::kToggleLmpLogging;
  DiagBody body;

  bool operator==(const DiagMessage&) const = default;
};

// Named counter layout of each statistics response kind. The field names are
// a local convention; only the counts are load-bearing on the wire.
std::span<const std::string_view> StatsSchema(DiagCode kind);
bool IsStatsResponse(DiagCode code);
bool IsStatsRequest(DiagCode code);
// Maps a Get*/Reset* request to the response kind it produces.
DiagCode StatsResponseFor(DiagCode request);

DiagMessage ParseDiag(ByteView payload);
Bytes BuildDiag(const DiagMessage& msg);

h4::H4Frame ToFrame(const DiagMessage& msg);
DiagMessage FromFrame(const h4::H4Frame& frame);

// Non-fatal anomalies of a well-formed message (e.g. nonzero reserved
// field, unusual direction). Empty when nothing is odd.
std::vector<std::string> AuditDiag(const DiagMessage& msg, Direction observed);

// Convenience constructors.
DiagMessage MakeToggle(bool enable);
DiagMessage MakePeek(MemAccessType access, uint32_t address);
DiagMessage MakePoke(MemAccessType access, uint32_t address, uint8_t value);
DiagMessage MakeHexdump(uint32_t address);
DiagMessage MakeStatsRequest(DiagCode code);
DiagMessage MakeStatsResponse(DiagCode kind, std::vector<uint32_t> values);
DiagMessage MakeRunTest(const TestParams& params);

}  // namespace btdiag::diag
