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

#include "btdiag/ll.h"

#include <cstdio>
#include <sstream>

#include "btdiag_tables.inc"

namespace btdiag::ll {
namespace {

std::string Hex2(uint8_t v) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "0x%02x", v);
  return buf;
}

[[noreturn]] void Fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

bool IsEscape(uint8_t opcode) {
  return opcode >= kFirstEscapeOpcode && opcode <= kLastEscapeOpcode;
}

// Looks up an LMP PDU; returns the entry and its total on-air length.
std::pair<const OpcodeEntry*, size_t> LookupLmp(uint8_t opcode, std::optional<uint8_t> ext) {
  const OpcodeEntry* entry = OpcodeTable::Lmp().Find(opcode, ext);
  if (!entry || entry->escape) return {nullptr, 0};
  return {entry, (ext ? 2u : 1u) + entry->param_length};
}

std::string Prefix(const RenderContext& ctx) {
  std::string out;
  if (ctx.direction) {
    out += ctx.direction == Direction::kHostToController ? "TX " : "RX ";
  }
  if (!ctx.peer.empty()) out += ctx.peer + " ";
  return out;
}

std::string ParamSuffix(const Bytes& params) {
  return params.empty() ? std::string() : " [" + ToHex(params) + "]";
}

}  // namespace

OpcodeTable OpcodeTable::Parse(std::string_view text) {
  OpcodeTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    unsigned opcode = 0;
    unsigned length = 0;
    unsigned escape = 0;
    std::string ext;
    OpcodeEntry entry;
    if (!(fields >> opcode >> ext >> entry.name >> length >> escape) || opcode > 0xff ||
        length > 0xff || escape > 1) {
      Fail(ErrorKind::kParse, "opcode table line " + std::to_string(line_no) + " malformed");
    }
    entry.opcode = static_cast<uint8_t>(opcode);
    if (ext != "-") entry.extended_opcode = static_cast<uint8_t>(std::stoul(ext));
    entry.param_length = static_cast<uint8_t>(length);
    entry.escape = escape == 1;
    table.entries_.push_back(std::move(entry));
  }
  return table;
}

const OpcodeTable& OpcodeTable::Lmp() {
  static const OpcodeTable table = Parse(LmpTableText());
  return table;
}

const OpcodeTable& OpcodeTable::Lcp() {
  static const OpcodeTable table = Parse(LcpTableText());
  return table;
}

const OpcodeEntry* OpcodeTable::Find(uint8_t opcode, std::optional<uint8_t> extended) const {
  for (const auto& e : entries_) {
    if (e.opcode == opcode && e.extended_opcode == extended) return &e;
  }
  return nullptr;
}

const OpcodeEntry* OpcodeTable::FindByName(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

std::string_view LmpTableText() { return kLmpOpcodesTsv; }
std::string_view LcpTableText() { return kLcpOpcodesTsv; }
std::string_view ConnectionSetupScriptText() { return kConnectionSetupSeq; }
std::string_view LeConnectionSetupScriptText() { return kLeConnectionSetupSeq; }

std::optional<std::string_view> BpcsSubtypeName(uint8_t subtype) {
  switch (subtype) {
    case 0x00: return "BPCS Features Request";
    case 0x01: return "BPCS Features Response";
    case 0x02: return "BPCS Not Accept";
    case 0x03: return "BPCS BFC Suspend";
    case 0x04: return "BPCS BFC Resume Request/Response";
    case 0x05: return "BPCS Accept";
    case kBpcsEnableDutSubtype: return "BPCS Enable Device Under Test Mode";
    default: return std::nullopt;
  }
}

LinkPdu DissectLmp(ByteView raw, bool padded_to_17) {
  if (raw.empty()) Fail(ErrorKind::kLengthMismatch, "empty LMP PDU");
  if (padded_to_17 && raw.size() != kMaxLmpPduSize) {
    Fail(ErrorKind::kLengthMismatch, "padded LMP record must be 17 octets");
  }
  uint8_t tid = raw[0] & 1;
  uint8_t opcode = raw[0] >> 1;

  if (opcode == kBpcsOpcode) {
    if (raw.size() < 2) Fail(ErrorKind::kLengthMismatch, "BPCS PDU lacks a subtype octet");
    size_t end = raw.size();
    if (padded_to_17) {
      while (end > 2 && raw[end - 1] == 0) --end;
    }
    return BpcsPdu{tid, raw[1], Bytes(raw.begin() + 2, raw.begin() + static_cast<ptrdiff_t>(end))};
  }

  std::optional<uint8_t> ext;
  if (IsEscape(opcode)) {
    if (raw.size() < 2) Fail(ErrorKind::kLengthMismatch, "escape opcode without extended octet");
    ext = raw[1];
  }
  auto [entry, total] = LookupLmp(opcode, ext);
  if (!entry) {
    Fail(ErrorKind::kUnknownOpcode,
         "unknown LMP opcode " + Hex2(opcode) + (ext ? "/" + Hex2(*ext) : std::string()));
  }
  if (padded_to_17 ? raw.size() < total : raw.size() != total) {
    Fail(ErrorKind::kLengthMismatch, entry->name + " needs " + std::to_string(total) +
                                         " octets, got " + std::to_string(raw.size()));
  }
  size_t header = ext ? 2 : 1;
  return LmpPdu{tid, opcode, ext,
                Bytes(raw.begin() + static_cast<ptrdiff_t>(header),
                      raw.begin() + static_cast<ptrdiff_t>(total))};
}

Bytes BuildLmp(const LinkPdu& pdu, bool allow_nonconformant) {
  Bytes out;
  if (const auto* bpcs = std::get_if<BpcsPdu>(&pdu)) {
    if (!allow_nonconformant && !bpcs->conformant()) {
      Fail(ErrorKind::kInvariantViolation, "BPCS subtype " + Hex2(bpcs->subtype) + " is out of range");
    }
    out.push_back(static_cast<uint8_t>((kBpcsOpcode << 1) | (bpcs->tid & 1)));
    out.push_back(bpcs->subtype);
    out.insert(out.end(), bpcs->params.begin(), bpcs->params.end());
  } else {
    const auto& lmp = std::get<LmpPdu>(pdu);
    if (!allow_nonconformant) {
      if (lmp.opcode > 0x7f || lmp.tid > 1) Fail(ErrorKind::kInvariantViolation, "opcode/tid out of range");
      if (lmp.opcode == kBpcsOpcode) Fail(ErrorKind::kInvariantViolation, "opcode 0 is BPCS");
      if (IsEscape(lmp.opcode) != lmp.extended_opcode.has_value()) {
        Fail(ErrorKind::kInvariantViolation, "extended opcode present iff opcode is an escape");
      }
      auto [entry, total] = LookupLmp(lmp.opcode, lmp.extended_opcode);
      if (!entry) Fail(ErrorKind::kInvariantViolation, "unknown LMP opcode " + Hex2(lmp.opcode));
      if (lmp.params.size() != entry->param_length) {
        Fail(ErrorKind::kInvariantViolation, entry->name + " takes " +
                                                 std::to_string(entry->param_length) + " parameter octets");
      }
    }
    out.push_back(static_cast<uint8_t>((lmp.opcode << 1) | (lmp.tid & 1)));
    if (lmp.extended_opcode) out.push_back(*lmp.extended_opcode);
    out.insert(out.end(), lmp.params.begin(), lmp.params.end());
  }
  if (!allow_nonconformant && out.size() > kMaxLmpPduSize) {
    Fail(ErrorKind::kInvariantViolation, "LMP PDU exceeds 17 octets");
  }
  return out;
}

LmpPdu MakeLmp(std::string_view name, uint8_t tid, Bytes params) {
  const OpcodeEntry* entry = OpcodeTable::Lmp().FindByName(name);
  if (!entry || entry->escape) Fail(ErrorKind::kUnknownOpcode, "no LMP PDU named " + std::string(name));
  LmpPdu pdu{tid, entry->opcode, entry->extended_opcode, std::move(params)};
  BuildLmp(pdu);
  return pdu;
}

std::string_view LmpName(const LmpPdu& pdu) {
  auto [entry, total] = LookupLmp(pdu.opcode, pdu.extended_opcode);
  return entry ? std::string_view(entry->name) : std::string_view();
}

std::optional<BdAddr> VendorLcp::NewAddress() const {
  if (subtype != static_cast<uint8_t>(VendorLcpSubtype::kRandomAddressChange) || params.size() != 6) {
    return std::nullopt;
  }
  return BdAddr::FromLittleEndian(params);
}

std::optional<std::string_view> VendorLcpSubtypeName(uint8_t subtype) {
  switch (subtype) {
    case 0x01: return "Vendor Specific Feature Request";
    case 0x02: return "Vendor Specific Feature Response";
    case 0x03: return "Vendor Specific Enable BCS Timeline";
    case 0x04: return "Random Address Change";
    default: return std::nullopt;
  }
}

LcpPdu DissectLcp(ByteView raw) {
  if (raw.empty()) Fail(ErrorKind::kUnknownOpcode, "empty LCP PDU has no opcode");
  LcpPdu pdu{raw[0], Bytes(raw.begin() + 1, raw.end()), std::nullopt};
  if (pdu.opcode == kLcpVendorOpcode) {
    if (pdu.params.empty() || !VendorLcpSubtypeName(pdu.params[0])) {
      Fail(ErrorKind::kUnknownVendorSubtype,
           "unknown vendor LCP subtype " + (pdu.params.empty() ? std::string("<none>") : Hex2(pdu.params[0])));
    }
    VendorLcp vendor{pdu.params[0], Bytes(pdu.params.begin() + 1, pdu.params.end())};
    if (vendor.subtype == static_cast<uint8_t>(VendorLcpSubtype::kRandomAddressChange) &&
        vendor.params.size() != 6) {
      Fail(ErrorKind::kLengthMismatch, "Random Address Change carries a 6-octet address");
    }
    pdu.vendor = std::move(vendor);
    return pdu;
  }
  const OpcodeEntry* entry = OpcodeTable::Lcp().Find(pdu.opcode);
  if (!entry) Fail(ErrorKind::kUnknownOpcode, "unknown LCP opcode " + Hex2(pdu.opcode));
  if (pdu.params.size() != entry->param_length) {
    Fail(ErrorKind::kLengthMismatch, entry->name + " needs " + std::to_string(entry->param_length) +
                                         " parameter octets, got " + std::to_string(pdu.params.size()));
  }
  return pdu;
}

Bytes BuildLcp(const LcpPdu& pdu, bool allow_nonconformant) {
  Bytes out{pdu.opcode};
  out.insert(out.end(), pdu.params.begin(), pdu.params.end());
  if (!allow_nonconformant) {
    // Round-tripping through the dissector is the conformance check.
    LcpPdu check;
    try {
      check = DissectLcp(out);
    } catch (const Error& e) {
      Fail(ErrorKind::kInvariantViolation, e.what());
    }
    if (check != pdu) Fail(ErrorKind::kInvariantViolation, "vendor view disagrees with params");
  }
  return out;
}

LcpPdu MakeLcp(std::string_view name, Bytes params) {
  const OpcodeEntry* entry = OpcodeTable::Lcp().FindByName(name);
  if (!entry || entry->escape) Fail(ErrorKind::kUnknownOpcode, "no LCP PDU named " + std::string(name));
  LcpPdu pdu{entry->opcode, std::move(params), std::nullopt};
  BuildLcp(pdu);
  return pdu;
}

LcpPdu MakeVendorLcp(VendorLcpSubtype subtype, Bytes params) {
  Bytes body;
  body.reserve(1 + params.size());
  body.push_back(static_cast<uint8_t>(subtype));
  body.insert(body.end(), params.begin(), params.end());
  LcpPdu pdu{kLcpVendorOpcode, std::move(body), std::nullopt};
  pdu.vendor = VendorLcp{static_cast<uint8_t>(subtype), std::move(params)};
  BuildLcp(pdu);
  return pdu;
}

std::string RenderText(const LmpPdu& pdu, const RenderContext& ctx) {
  std::string name(LmpName(pdu));
  if (name.empty()) {
    name = "LMP_unknown(" + Hex2(pdu.opcode) +
           (pdu.extended_opcode ? "/" + Hex2(*pdu.extended_opcode) : std::string()) + ")";
  }
  return Prefix(ctx) + name + " tid=" + std::to_string(pdu.tid) + ParamSuffix(pdu.params);
}

std::string RenderText(const BpcsPdu& pdu, const RenderContext& ctx) {
  auto name = BpcsSubtypeName(pdu.subtype);
  std::string out = Prefix(ctx) +
                    (name ? std::string(*name) : "BPCS_unknown(" + Hex2(pdu.subtype) + ")") +
                    " tid=" + std::to_string(pdu.tid) + ParamSuffix(pdu.params);
  if (!pdu.conformant()) out += " (non-conformant)";
  return out;
}

std::string RenderText(const LinkPdu& pdu, const RenderContext& ctx) {
  return std::visit([&](const auto& p) { return RenderText(p, ctx); }, pdu);
}

std::string RenderText(const LcpPdu& pdu, const RenderContext& ctx) {
  if (pdu.opcode == kLcpVendorOpcode && pdu.vendor) {
    auto name = VendorLcpSubtypeName(pdu.vendor->subtype);
    std::string out = Prefix(ctx) + "LCP_vendor " +
                      (name ? std::string(*name) : "unknown(" + Hex2(pdu.vendor->subtype) + ")");
    if (auto addr = pdu.vendor->NewAddress()) return out + " " + addr->ToString();
    return out + ParamSuffix(pdu.vendor->params);
  }
  const OpcodeEntry* entry = OpcodeTable::Lcp().Find(pdu.opcode);
  std::string name = entry && !entry->escape ? entry->name : "LCP_unknown(" + Hex2(pdu.opcode) + ")";
  return Prefix(ctx) + name + ParamSuffix(pdu.params);
}

}  // namespace btdiag::ll
