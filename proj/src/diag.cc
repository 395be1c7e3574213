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

#include "btdiag/diag.h"

#include <algorithm>
#include <cstdio>

namespace btdiag::diag {
namespace {

constexpr DiagCode kAllCodes[] = {
    DiagCode::kLmpSent,          DiagCode::kLmpReceived,     DiagCode::kPeekResponse,
    DiagCode::kHexdumpResponse,  DiagCode::kTestCompleted,   DiagCode::kPokeResponse,
    DiagCode::kCpuLoadResponse,  DiagCode::kBrAclStats,      DiagCode::kEdrAclStats,
    DiagCode::kAuxResponse,      DiagCode::kScoStats,        DiagCode::kEscoStats,
    DiagCode::kConnectionResponse, DiagCode::kLcpSent,       DiagCode::kLcpReceived,
    DiagCode::kResetBrAclStats,  DiagCode::kGetBrAclStats,   DiagCode::kGetEdrAclStats,
    DiagCode::kGetAuxStats,      DiagCode::kGetScoStats,     DiagCode::kGetEscoStats,
    DiagCode::kGetConnectionStats, DiagCode::kToggleLmpLogging, DiagCode::kMemoryPeek,
    DiagCode::kMemoryPoke,       DiagCode::kMemoryHexdump,   DiagCode::kRunTest,
};

constexpr std::string_view kAclSchema[] = {"tx_packets", "rx_packets", "rx_crc_errors",
                                           "rx_hec_errors", "retransmissions"};
constexpr std::string_view kSyncSchema[] = {"tx_packets", "rx_packets", "rx_errors"};
constexpr std::string_view kCpuSchema[] = {"load_percent"};
constexpr std::string_view kAuxSchema[] = {"raw_word"};
constexpr std::string_view kConnSchema[] = {"handle", "low_mac", "role", "state"};

// LCP records carry a length octet after the MAC; this bounds the payload
// to what fits in the envelope.
constexpr size_t kMaxLcpRecordPayload = h4::kEnvelopePayloadSize - 1 - 6 - 1;

[[noreturn]] void Malformed(DiagCode code, const std::string& reason) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "0x%02x", static_cast<unsigned>(code));
  throw Error(ErrorKind::kMalformedBody,
              std::string(DiagCodeName(code)) + " (" + buf + "): " + reason);
}

[[noreturn]] void Violation(const std::string& reason) {
  throw Error(ErrorKind::kInvariantViolation, reason);
}

// Cursor over a message body that reports truncation as MalformedBody.
class Reader {
 public:
  Reader(DiagCode code, ByteView data) : code_(code), data_(data) {}

  uint8_t U8() {
    Need(1);
    return data_[pos_++];
  }
  uint16_t U16() {
    Need(2);
    uint16_t v = GetLe16(data_, pos_);
    pos_ += 2;
    return v;
  }
  uint32_t U32() {
    Need(4);
    uint32_t v = GetLe32(data_, pos_);
    pos_ += 4;
    return v;
  }
  template <size_t N>
  std::array<uint8_t, N> Array() {
    Need(N);
    std::array<uint8_t, N> out;
    std::copy_n(data_.begin() + static_cast<ptrdiff_t>(pos_), N, out.begin());
    pos_ += N;
    return out;
  }
  Bytes Take(size_t n) {
    Need(n);
    Bytes out(data_.begin() + static_cast<ptrdiff_t>(pos_),
              data_.begin() + static_cast<ptrdiff_t>(pos_ + n));
    pos_ += n;
    return out;
  }
  // Everything after the body must be envelope padding.
  void ExpectPadding() const {
    for (size_t i = pos_; i < data_.size(); ++i) {
      if (data_[i] != 0) Malformed(code_, "nonzero octet after body at offset " + std::to_string(i));
    }
  }

 private:
  void Need(size_t n) const {
    if (data_.size() - pos_ < n) Malformed(code_, "body truncated");
  }

  DiagCode code_;
  ByteView data_;
  size_t pos_ = 0;
};

MemAccessType ParsePeekPokeAccess(DiagCode code, uint8_t raw) {
  if (raw == static_cast<uint8_t>(MemAccessType::kArm)) return MemAccessType::kArm;
  if (raw == static_cast<uint8_t>(MemAccessType::kBlueRf)) return MemAccessType::kBlueRf;
  char buf[8];
  std::snprintf(buf, sizeof(buf), "0x%02x", raw);
  Malformed(code, std::string("bad access type ") + buf);
}

void CheckPeekPokeAccess(MemAccessType access) {
  if (access != MemAccessType::kArm && access != MemAccessType::kBlueRf) {
    Violation("peek/poke access type must be ARM (0x02) or BlueRF (0x03)");
  }
}

template <typename T>
const T& BodyAs(const DiagMessage& msg) {
  const T* body = std::get_if<T>(&msg.body);
  if (!body) Violation(std::string("body does not match code ") + std::string(DiagCodeName(msg.code)));
  return *body;
}

}  // namespace

std::span<const DiagCode> AllDiagCodes() { return kAllCodes; }

std::optional<DiagCode> DiagCodeFromOctet(uint8_t octet) {
  for (DiagCode code : kAllCodes) {
    if (static_cast<uint8_t>(code) == octet) return code;
  }
  return std::nullopt;
}

std::string_view DiagCodeName(DiagCode code) {
  switch (code) {
    case DiagCode::kLmpSent: return "LMP Sent";
    case DiagCode::kLmpReceived: return "LMP Received";
    case DiagCode::kPeekResponse: return "Peek Response";
    case DiagCode::kHexdumpResponse: return "Hexdump Response";
    case DiagCode::kTestCompleted: return "Test Completed";
    case DiagCode::kPokeResponse: return "Poke Response";
    case DiagCode::kCpuLoadResponse: return "CPU Load Response";
    case DiagCode::kBrAclStats: return "BR ACL Stats";
    case DiagCode::kEdrAclStats: return "EDR ACL Stats";
    case DiagCode::kAuxResponse: return "AUX Response";
    case DiagCode::kScoStats: return "SCO Stats";
    case DiagCode::kEscoStats: return "eSCO Stats";
    case DiagCode::kConnectionResponse: return "Connection Response";
    case DiagCode::kLcpSent: return "LCP Sent";
    case DiagCode::kLcpReceived: return "LCP Received";
    case DiagCode::kResetBrAclStats: return "Reset BR ACL Stats";
    case DiagCode::kGetBrAclStats: return "Get BR ACL Stats";
    case DiagCode::kGetEdrAclStats: return "Get EDR ACL Stats";
    case DiagCode::kGetAuxStats: return "Get AUX Stats";
    case DiagCode::kGetScoStats: return "Get SCO Stats";
    case DiagCode::kGetEscoStats: return "Get eSCO Stats";
    case DiagCode::kGetConnectionStats: return "Get Connection Stats";
    case DiagCode::kToggleLmpLogging: return "Toggle LMP Logging";
    case DiagCode::kMemoryPeek: return "Memory Peek";
    case DiagCode::kMemoryPoke: return "Memory Poke";
    case DiagCode::kMemoryHexdump: return "Memory Hexdump";
    case DiagCode::kRunTest: return "Run Test";
  }
  return "?";
}

Direction DiagDirection(DiagCode code) {
  auto raw = static_cast<uint8_t>(code);
  if (raw == 0x80 || raw == 0x81 || raw < 0xb9) return Direction::kControllerToHost;
  return Direction::kHostToController;
}

std::span<const std::string_view> StatsSchema(DiagCode kind) {
  switch (kind) {
    case DiagCode::kBrAclStats:
    case DiagCode::kEdrAclStats:
      return kAclSchema;
    case DiagCode::kScoStats:
    case DiagCode::kEscoStats:
      return kSyncSchema;
    case DiagCode::kCpuLoadResponse:
      return kCpuSchema;
    case DiagCode::kAuxResponse:
      return kAuxSchema;
    case DiagCode::kConnectionResponse:
      return kConnSchema;
    default:
      return {};
  }
}

bool IsStatsResponse(DiagCode code) { return !StatsSchema(code).empty(); }

bool IsStatsRequest(DiagCode code) {
  switch (code) {
    case DiagCode::kResetBrAclStats:
    case DiagCode::kGetBrAclStats:
    case DiagCode::kGetEdrAclStats:
    case DiagCode::kGetAuxStats:
    case DiagCode::kGetScoStats:
    case DiagCode::kGetEscoStats:
    case DiagCode::kGetConnectionStats:
      return true;
    default:
      return false;
  }
}

DiagCode StatsResponseFor(DiagCode request) {
  switch (request) {
    case DiagCode::kResetBrAclStats:
    case DiagCode::kGetBrAclStats: return DiagCode::kBrAclStats;
    case DiagCode::kGetEdrAclStats: return DiagCode::kEdrAclStats;
    case DiagCode::kGetAuxStats: return DiagCode::kAuxResponse;
    case DiagCode::kGetScoStats: return DiagCode::kScoStats;
    case DiagCode::kGetEscoStats: return DiagCode::kEscoStats;
    case DiagCode::kGetConnectionStats: return DiagCode::kConnectionResponse;
    default: Violation("not a statistics request code");
  }
}

DiagMessage ParseDiag(ByteView payload) {
  if (payload.empty()) throw Error(ErrorKind::kMalformedBody, "empty diagnostic payload");
  auto code = DiagCodeFromOctet(payload[0]);
  if (!code) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "0x%02x", payload[0]);
    throw Error(ErrorKind::kUnknownDiagCode, std::string("unknown diagnostic code ") + buf);
  }
  Reader in(*code, payload.subspan(1));
  DiagMessage msg{*code, StatsRequest{}};

  switch (*code) {
    case DiagCode::kToggleLmpLogging: {
      uint8_t flag = in.U8();
      if (flag > 1) Malformed(*code, "enable flag must be 0x00 or 0x01");
      msg.body = ToggleLmpLogging{flag == 1};
      break;
    }
    case DiagCode::kMemoryPeek: {
      MemAccessType access = ParsePeekPokeAccess(*code, in.U8());
      msg.body = MemoryPeek{access, in.U32()};
      break;
    }
    case DiagCode::kMemoryPoke: {
      MemAccessType access = ParsePeekPokeAccess(*code, in.U8());
      uint32_t address = in.U32();
      msg.body = MemoryPoke{access, address, in.U8()};
      break;
    }
    case DiagCode::kMemoryHexdump: {
      if (in.U8() != static_cast<uint8_t>(MemAccessType::kHexdumpArm)) {
        Malformed(*code, "hexdump access type must be 0x04");
      }
      msg.body = MemoryHexdump{in.U32()};
      break;
    }
    case DiagCode::kPeekResponse: {
      uint8_t value = in.U8();
      // A missing status octet is indistinguishable from zero padding.
      uint8_t status = payload.size() > 2 ? in.U8() : 0;
      msg.body = PeekResponse{value, status};
      break;
    }
    case DiagCode::kPokeResponse:
      msg.body = PokeResponse{payload.size() > 1 ? in.U8() : uint8_t{0}};
      break;
    case DiagCode::kHexdumpResponse: {
      uint32_t address = in.U32();
      msg.body = HexdumpResponse{address, in.Array<kHexdumpSize>()};
      break;
    }
    case DiagCode::kRunTest: {
      TestParams p;
      p.scenario = in.U8();
      p.hopping_mode = in.U8();
      p.tx_frequency = in.U8();
      p.rx_frequency = in.U8();
      p.power_level = in.U8();
      p.packet_type = in.U8();
      p.payload_length = in.U16();
      p.packet_count = in.U16();
      msg.body = RunTest{p};
      break;
    }
    case DiagCode::kTestCompleted: {
      TestCompleted t;
      t.status = in.U8();
      t.tx_count = in.U16();
      t.reserved = in.U16();
      t.rx_count = in.U16();
      msg.body = t;
      break;
    }
    case DiagCode::kLmpSent:
    case DiagCode::kLmpReceived: {
      LmpLogRecord rec;
      rec.low_mac = in.Array<4>();
      rec.payload = in.Array<kLmpRecordPayloadSize>();
      msg.body = rec;
      break;
    }
    case DiagCode::kLcpSent:
    case DiagCode::kLcpReceived: {
      BdAddr mac = BdAddr::FromLittleEndian(in.Array<6>());
      uint8_t len = in.U8();
      if (len > kMaxLcpRecordPayload) Malformed(*code, "LCP record length exceeds envelope");
      msg.body = LcpLogRecord{mac, in.Take(len)};
      break;
    }
    case DiagCode::kCpuLoadResponse:
    case DiagCode::kBrAclStats:
    case DiagCode::kEdrAclStats:
    case DiagCode::kAuxResponse:
    case DiagCode::kScoStats:
    case DiagCode::kEscoStats:
    case DiagCode::kConnectionResponse: {
      StatsCounters counters{*code, {}};
      for (size_t i = 0; i < StatsSchema(*code).size(); ++i) counters.values.push_back(in.U32());
      msg.body = StatsResponse{std::move(counters)};
      break;
    }
    case DiagCode::kResetBrAclStats:
    case DiagCode::kGetBrAclStats:
    case DiagCode::kGetEdrAclStats:
    case DiagCode::kGetAuxStats:
    case DiagCode::kGetScoStats:
    case DiagCode::kGetEscoStats:
    case DiagCode::kGetConnectionStats:
      msg.body = StatsRequest{};
      break;
  }
  in.ExpectPadding();
  return msg;
}

Bytes BuildDiag(const DiagMessage& msg) {
  Bytes out{static_cast<uint8_t>(msg.code)};
  switch (msg.code) {
    case DiagCode::kToggleLmpLogging:
      out.push_back(BodyAs<ToggleLmpLogging>(msg).enable ? 1 : 0);
      break;
    case DiagCode::kMemoryPeek: {
      const auto& b = BodyAs<MemoryPeek>(msg);
      CheckPeekPokeAccess(b.access);
      out.push_back(static_cast<uint8_t>(b.access));
      PutLe32(out, b.address);
      break;
    }
    case DiagCode::kMemoryPoke: {
      const auto& b = BodyAs<MemoryPoke>(msg);
      CheckPeekPokeAccess(b.access);
      out.push_back(static_cast<uint8_t>(b.access));
      PutLe32(out, b.address);
      out.push_back(b.value);
      break;
    }
    case DiagCode::kMemoryHexdump:
      out.push_back(static_cast<uint8_t>(MemAccessType::kHexdumpArm));
      PutLe32(out, BodyAs<MemoryHexdump>(msg).address);
      break;
    case DiagCode::kPeekResponse: {
      const auto& b = BodyAs<PeekResponse>(msg);
      out.push_back(b.value);
      if (b.status) out.push_back(b.status);
      break;
    }
    case DiagCode::kPokeResponse:
      out.push_back(BodyAs<PokeResponse>(msg).status);
      break;
    case DiagCode::kHexdumpResponse: {
      const auto& b = BodyAs<HexdumpResponse>(msg);
      PutLe32(out, b.address);
      out.insert(out.end(), b.data.begin(), b.data.end());
      break;
    }
    case DiagCode::kRunTest: {
      const auto& p = BodyAs<RunTest>(msg).params;
      if (p.payload_length > kMaxTestPayloadLength) Violation("test payload length exceeds 1021");
      out.insert(out.end(), {p.scenario, p.hopping_mode, p.tx_frequency, p.rx_frequency,
                             p.power_level, p.packet_type});
      PutLe16(out, p.payload_length);
      PutLe16(out, p.packet_count);
      break;
    }
    case DiagCode::kTestCompleted: {
      const auto& t = BodyAs<TestCompleted>(msg);
      if (t.reserved != 0) Violation("TestCompleted reserved field must be zero");
      out.push_back(t.status);
      PutLe16(out, t.tx_count);
      PutLe16(out, t.reserved);
      PutLe16(out, t.rx_count);
      break;
    }
    case DiagCode::kLmpSent:
    case DiagCode::kLmpReceived: {
      const auto& r = BodyAs<LmpLogRecord>(msg);
      out.insert(out.end(), r.low_mac.begin(), r.low_mac.end());
      out.insert(out.end(), r.payload.begin(), r.payload.end());
      break;
    }
    case DiagCode::kLcpSent:
    case DiagCode::kLcpReceived: {
      const auto& r = BodyAs<LcpLogRecord>(msg);
      if (r.payload.size() > kMaxLcpRecordPayload) Violation("LCP record payload too long");
      out.insert(out.end(), r.mac.octets.begin(), r.mac.octets.end());
      out.push_back(static_cast<uint8_t>(r.payload.size()));
      out.insert(out.end(), r.payload.begin(), r.payload.end());
      break;
    }
    case DiagCode::kCpuLoadResponse:
    case DiagCode::kBrAclStats:
    case DiagCode::kEdrAclStats:
    case DiagCode::kAuxResponse:
    case DiagCode::kScoStats:
    case DiagCode::kEscoStats:
    case DiagCode::kConnectionResponse: {
      const auto& c = BodyAs<StatsResponse>(msg).counters;
      if (c.kind != msg.code) Violation("stats kind does not match message code");
      if (c.values.size() != StatsSchema(msg.code).size()) {
        Violation("stats counter count does not match schema");
      }
      for (uint32_t v : c.values) PutLe32(out, v);
      break;
    }
    case DiagCode::kResetBrAclStats:
    case DiagCode::kGetBrAclStats:
    case DiagCode::kGetEdrAclStats:
    case DiagCode::kGetAuxStats:
    case DiagCode::kGetScoStats:
    case DiagCode::kGetEscoStats:
    case DiagCode::kGetConnectionStats:
      BodyAs<StatsRequest>(msg);
      break;
  }
  if (out.size() > h4::kEnvelopePayloadSize) Violation("diagnostic message exceeds envelope");
  return out;
}

h4::H4Frame ToFrame(const DiagMessage& msg) {
  return h4::MakeEnvelopeFrame(h4::H4Type::kDiag, BuildDiag(msg));
}

DiagMessage FromFrame(const h4::H4Frame& frame) {
  if (frame.type != h4::H4Type::kDiag) {
    throw Error(ErrorKind::kMalformedBody, "frame is not a diagnostic frame");
  }
  return ParseDiag(frame.payload);
}

std::vector<std::string> AuditDiag(const DiagMessage& msg, Direction observed) {
  std::vector<std::string> notes;
  if (DiagDirection(msg.code) != observed) {
    notes.push_back(std::string(DiagCodeName(msg.code)) + " seen in unexpected direction " +
                    std::string(DirectionArrow(observed)));
  }
  if (const auto* t = std::get_if<TestCompleted>(&msg.body); t && t->reserved != 0) {
    notes.push_back("TestCompleted reserved field is nonzero");
  }
  return notes;
}

DiagMessage MakeToggle(bool enable) {
  return {DiagCode::kToggleLmpLogging, ToggleLmpLogging{enable}};
}

DiagMessage MakePeek(MemAccessType access, uint32_t address) {
  return {DiagCode::kMemoryPeek, MemoryPeek{access, address}};
}

DiagMessage MakePoke(MemAccessType access, uint32_t address, uint8_t value) {
  return {DiagCode::kMemoryPoke, MemoryPoke{access, address, value}};
}

DiagMessage MakeHexdump(uint32_t address) {
  return {DiagCode::kMemoryHexdump, MemoryHexdump{address}};
}

DiagMessage MakeStatsRequest(DiagCode code) {
  if (!IsStatsRequest(code)) Violation("not a statistics request code");
  return {code, StatsRequest{}};
}

DiagMessage MakeStatsResponse(DiagCode kind, std::vector<uint32_t> values) {
  if (values.size() != StatsSchema(kind).size()) Violation("stats counter count does not match schema");
  return {kind, StatsResponse{StatsCounters{kind, std::move(values)}}};
}

DiagMessage MakeRunTest(const TestParams& params) { return {DiagCode::kRunTest, RunTest{params}}; }

}  // namespace btdiag::diag
