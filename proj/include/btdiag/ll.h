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

// Link-layer control PDUs: Classic LMP (with Broadcom BPCS under opcode 0)
// and LE LL control PDUs (with Broadcom vendor extensions under 0xff).
//
// Opcode names and parameter lengths come from data/lmp_opcodes.tsv and
// data/lcp_opcodes.tsv, compiled into the library verbatim.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "btdiag/common.h"

namespace btdiag::ll {

inline constexpr size_t kMaxLmpPduSize = 17;
inline constexpr uint8_t kFirstEscapeOpcode = 124;
inline constexpr uint8_t kLastEscapeOpcode = 127;
inline constexpr uint8_t kBpcsOpcode = 0x00;
inline constexpr uint8_t kLcpVendorOpcode = 0xff;

// LMP opcodes the emulator speaks.
inline constexpr uint8_t kLmpAccepted = 3;
inline constexpr uint8_t kLmpNotAccepted = 4;
inline constexpr uint8_t kLmpDetach = 7;
inline constexpr uint8_t kLmpAuRand = 11;
inline constexpr uint8_t kLmpStartEncryptionReq = 17;
inline constexpr uint8_t kLmpVersionReq = 37;
inline constexpr uint8_t kLmpVersionRes = 38;
inline constexpr uint8_t kLmpFeaturesReq = 39;
inline constexpr uint8_t kLmpFeaturesRes = 40;
inline constexpr uint8_t kLmpSetupComplete = 49;
inline constexpr uint8_t kLmpHostConnectionReq = 51;
inline constexpr uint8_t kLmpDhkeyCheck = 65;
inline constexpr uint8_t kLmpEscape4 = 127;
inline constexpr uint8_t kLmpExtAccepted = 1;
inline constexpr uint8_t kLmpExtNotAccepted = 2;
inline constexpr uint8_t kLmpExtFeaturesReq = 3;
inline constexpr uint8_t kLmpExtFeaturesRes = 4;
inline constexpr uint8_t kLmpExtIoCapabilityReq = 25;
inline constexpr uint8_t kLmpExtIoCapabilityRes = 26;

// LL control opcodes the emulator speaks.
inline constexpr uint8_t kLlTerminateInd = 0x02;
inline constexpr uint8_t kLlUnknownRsp = 0x07;
inline constexpr uint8_t kLlFeatureReq = 0x08;
inline constexpr uint8_t kLlFeatureRsp = 0x09;
inline constexpr uint8_t kLlVersionInd = 0x0c;
inline constexpr uint8_t kLlRejectInd = 0x0d;
inline constexpr uint8_t kLlRejectExtInd = 0x11;

inline constexpr uint8_t kErrorPduNotAllowed = 0x24;

struct OpcodeEntry {
  uint8_t opcode = 0;
  std::optional<uint8_t> extended_opcode;
  std::string name;
  uint8_t param_length = 0;
  bool escape = false;
};

class OpcodeTable {
 public:
  // Parses the tab-separated table format; throws Error{kParse}.
  static OpcodeTable Parse(std::string_view text);
  static const OpcodeTable& Lmp();
  static const OpcodeTable& Lcp();

  const OpcodeEntry* Find(uint8_t opcode, std::optional<uint8_t> extended = std::nullopt) const;
  const OpcodeEntry* FindByName(std::string_view name) const;
  const std::vector<OpcodeEntry>& entries() const { return entries_; }

 private:
  std::vector<OpcodeEntry> entries_;
};

// Raw text of the checked-in data files.
std::string_view LmpTableText();
std::string_view LcpTableText();
std::string_view ConnectionSetupScriptText();
std::string_view LeConnectionSetupScriptText();

enum class Role : uint8_t { kMaster = 0, kSlave = 1 };

// Transaction ID of PDUs initiated from the given piconet role.
constexpr uint8_t DefaultTid(Role role) { return role == Role::kMaster ? 0 : 1; }

struct LmpPdu {
  uint8_t tid = 0;
  uint8_t opcode = 0;  // 7 bits
  std::optional<uint8_t> extended_opcode;
  Bytes params;

  bool operator==(const LmpPdu&) const = default;
};

enum class BpcsSubtype : uint8_t {
  kFeaturesRequest = 0x00,
  kFeaturesResponse = 0x01,
  kNotAccept = 0x02,
  kBfcSuspend = 0x03,
  kBfcResumeReqResp = 0x04,
  kBpcsAccept = 0x05,
};
inline constexpr uint8_t kMaxBpcsSubtype = 0x05;
// Lands on HCI_Enable_Device_Under_Test_Mode in vulnerable firmware.
inline constexpr uint8_t kBpcsEnableDutSubtype = 0x95;

struct BpcsPdu {
  uint8_t tid = 0;
  uint8_t subtype = 0;
  Bytes params;  // opaque

  bool conformant() const { return subtype <= kMaxBpcsSubtype; }
  bool operator==(const BpcsPdu&) const = default;
};

using LinkPdu = std::variant<LmpPdu, BpcsPdu>;

std::optional<std::string_view> BpcsSubtypeName(uint8_t subtype);

// Decodes an LMP PDU. With `padded_to_17` the record is first cut back to
// the PDU's true length (diagnostic RX records always claim 17 octets);
// BPCS bodies have no table entry, so trailing zero octets are dropped.
LinkPdu DissectLmp(ByteView raw, bool padded_to_17);
Bytes BuildLmp(const LinkPdu& pdu, bool allow_nonconformant = false);

// Builds a conformant PDU by table name, e.g. "LMP_accepted".
LmpPdu MakeLmp(std::string_view name, uint8_t tid, Bytes params = {});
std::string_view LmpName(const LmpPdu& pdu);  // empty if unknown

enum class VendorLcpSubtype : uint8_t {
  kFeatureRequest = 0x01,
  kFeatureResponse = 0x02,
  kEnableBcsTimeline = 0x03,
  kRandomAddressChange = 0x04,
};

struct VendorLcp {
  uint8_t subtype = 0;
  Bytes params;

  std::optional<BdAddr> NewAddress() const;
  bool operator==(const VendorLcp&) const = default;
};

// `params` is the CtrData after the opcode. For opcode 0xff it holds the
// vendor subtype followed by the vendor body, and `vendor` is populated.
struct LcpPdu {
  uint8_t opcode = 0;
  Bytes params;
  std::optional<VendorLcp> vendor;

  bool operator==(const LcpPdu&) const = default;
};

std::optional<std::string_view> VendorLcpSubtypeName(uint8_t subtype);

LcpPdu DissectLcp(ByteView raw);
Bytes BuildLcp(const LcpPdu& pdu, bool allow_nonconformant = false);
LcpPdu MakeLcp(std::string_view name, Bytes params = {});
LcpPdu MakeVendorLcp(VendorLcpSubtype subtype, Bytes params = {});

struct RenderContext {
  std::optional<Direction> direction;
  std::string peer;  // address text, full or truncated
};

// Single-line, deterministic renderings for live views.
std::string RenderText(const LmpPdu& pdu, const RenderContext& ctx = {});
std::string RenderText(const BpcsPdu& pdu, const RenderContext& ctx = {});
std::string RenderText(const LinkPdu& pdu, const RenderContext& ctx = {});
std::string RenderText(const LcpPdu& pdu, const RenderContext& ctx = {});

}  // namespace btdiag::ll
