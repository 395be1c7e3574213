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

#include "btdiag/capture.h"

#include <cstdio>
#include <fstream>

#include "btdiag/diag.h"
#include "btdiag/hci.h"
#include "btdiag/ll.h"

namespace btdiag::capture {
namespace {

constexpr uint32_t kShbType = 0x0a0d0d0a;
constexpr uint32_t kIdbType = 0x00000001;
constexpr uint32_t kEpbType = 0x00000006;
constexpr uint32_t kByteOrderMagic = 0x1a2b3c4d;
constexpr uint32_t kSnapLen = 65535;
// Microseconds between 0000-01-01 and 1970-01-01, the BTSnoop epoch.
constexpr uint64_t kBtsnoopEpochDelta = 0x00dcddb30f2f8000ull;

void PutBe32(Bytes& out, uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void PutBe64(Bytes& out, uint64_t v) {
  for (int i = 7; i >= 0; --i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void Pad4(Bytes& out) {
  while (out.size() % 4) out.push_back(0);
}

// pcapng block: type, total length, body, total length.
void PutBlock(Bytes& out, uint32_t type, Bytes body) {
  Pad4(body);
  auto total = static_cast<uint32_t>(body.size() + 12);
  PutLe32(out, type);
  PutLe32(out, total);
  out.insert(out.end(), body.begin(), body.end());
  PutLe32(out, total);
}

void PutOption(Bytes& out, uint16_t code, std::string_view value) {
  PutLe16(out, code);
  PutLe16(out, static_cast<uint16_t>(value.size()));
  out.insert(out.end(), value.begin(), value.end());
  Pad4(out);
}

void InterfaceBlock(Bytes& out, uint16_t link_type, std::string_view name, std::string_view description) {
  Bytes body;
  PutLe16(body, link_type);
  PutLe16(body, 0);
  PutLe32(body, kSnapLen);
  PutOption(body, 2, name);         // if_name
  PutOption(body, 3, description);  // if_description
  PutLe32(body, 0);                 // opt_endofopt
  PutBlock(out, kIdbType, std::move(body));
}

void CheckOrdered(const std::vector<CaptureRecord>& records) {
  for (size_t i = 1; i < records.size(); ++i) {
    if (records[i].timestamp_us < records[i - 1].timestamp_us) {
      throw Error(ErrorKind::kInvariantViolation,
                  "capture timestamps decrease at record " + std::to_string(i));
    }
  }
}

void WriteFile(const std::filesystem::path& path, const Bytes& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
}

std::string Hex2(uint8_t v) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "0x%02x", v);
  return buf;
}

std::string Hex8(uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "0x%08x", v);
  return buf;
}

ByteView TrimZeros(ByteView bytes) {
  size_t n = bytes.size();
  while (n > 0 && bytes[n - 1] == 0) --n;
  return bytes.first(n);
}

std::string AccessName(diag::MemAccessType access) {
  switch (access) {
    case diag::MemAccessType::kArm: return "arm";
    case diag::MemAccessType::kBlueRf: return "bluerf";
    case diag::MemAccessType::kHexdumpArm: return "hexdump-arm";
  }
  return "?";
}

std::string DescribeDiag(const diag::DiagMessage& msg) {
  std::string out = "DIAG " + std::string(diag::DiagCodeName(msg.code));
  return std::visit(
      [&](const auto& body) -> std::string {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, diag::ToggleLmpLogging>) {
          return std::string("DIAG LMP logging ") + (body.enable ? "ON" : "OFF");
        } else if constexpr (std::is_same_v<T, diag::MemoryPeek>) {
          return out + " " + AccessName(body.access) + " " + Hex8(body.address);
        } else if constexpr (std::is_same_v<T, diag::MemoryPoke>) {
          return out + " " + AccessName(body.access) + " " + Hex8(body.address) + " = " + Hex2(body.value);
        } else if constexpr (std::is_same_v<T, diag::MemoryHexdump>) {
          return out + " " + Hex8(body.address);
        } else if constexpr (std::is_same_v<T, diag::PeekResponse>) {
          return out + " value=" + Hex2(body.value) + " status=" + Hex2(body.status);
        } else if constexpr (std::is_same_v<T, diag::PokeResponse>) {
          return out + " status=" + Hex2(body.status);
        } else if constexpr (std::is_same_v<T, diag::HexdumpResponse>) {
          return out + " " + Hex8(body.address) + ": " + ToHex(body.data);
        } else if constexpr (std::is_same_v<T, diag::RunTest>) {
          const auto& p = body.params;
          return out + " scenario=" + Hex2(p.scenario) + " hop=" + std::to_string(p.hopping_mode) +
                 " tx=" + std::to_string(p.tx_frequency) + " rx=" + std::to_string(p.rx_frequency) +
                 " power=" + std::to_string(p.power_level) + " ptype=" + Hex2(p.packet_type) +
                 " len=" + std::to_string(p.payload_length) + " count=" + std::to_string(p.packet_count);
        } else if constexpr (std::is_same_v<T, diag::TestCompleted>) {
          std::string s = out + " status=" + Hex2(body.status) + " tx=" + std::to_string(body.tx_count) +
                          " rx=" + std::to_string(body.rx_count);
          if (body.reserved) s += " reserved=" + std::to_string(body.reserved);
          return s;
        } else if constexpr (std::is_same_v<T, diag::LmpLogRecord>) {
          bool rx = msg.code == diag::DiagCode::kLmpReceived;
          ll::RenderContext ctx{rx ? Direction::kControllerToHost : Direction::kHostToController,
                                ToHex(body.low_mac, ":")};
          try {
            return out + " " + ll::RenderText(ll::DissectLmp(body.payload, /*padded_to_17=*/true), ctx);
          } catch (const Error&) {
            return out + " " + ctx.peer + " raw [" + ToHex(body.payload) + "]";
          }
        } else if constexpr (std::is_same_v<T, diag::LcpLogRecord>) {
          bool rx = msg.code == diag::DiagCode::kLcpReceived;
          ll::RenderContext ctx{rx ? Direction::kControllerToHost : Direction::kHostToController,
                                body.mac.ToString()};
          try {
            return out + " " + ll::RenderText(ll::DissectLcp(body.payload), ctx);
          } catch (const Error&) {
            return out + " " + ctx.peer + " raw [" + ToHex(body.payload) + "]";
          }
        } else if constexpr (std::is_same_v<T, diag::StatsResponse>) {
          auto schema = diag::StatsSchema(body.counters.kind);
          for (size_t i = 0; i < body.counters.values.size(); ++i) {
            out += " ";
            out += i < schema.size() ? std::string(schema[i]) : "v" + std::to_string(i);
            out += "=" + std::to_string(body.counters.values[i]);
          }
          return out;
        } else {
          return out;
        }
      },
      msg.body);
}

}  // namespace

bool IsHciFrame(const h4::H4Frame& frame) { return !h4::IsEnvelopeType(frame.type); }

Bytes SerializePcapng(const std::vector<CaptureRecord>& records) {
  CheckOrdered(records);
  Bytes out;
  Bytes shb;
  PutLe32(shb, kByteOrderMagic);
  PutLe16(shb, 1);
  PutLe16(shb, 0);
  PutLe32(shb, 0xffffffff);  // section length unknown
  PutLe32(shb, 0xffffffff);
  PutOption(shb, 4, "btdiag");  // shb_userappl
  PutLe32(shb, 0);
  PutBlock(out, kShbType, std::move(shb));
  InterfaceBlock(out, kLinkTypeH4WithPhdr, "h4", "HCI H4 with direction pseudo-header");
  InterfaceBlock(out, kLinkTypeDiag, "diag", "Broadcom diagnostic envelope, 1-octet direction prefix");

  for (const auto& rec : records) {
    Bytes packet;
    uint32_t interface_id;
    if (IsHciFrame(rec.frame)) {
      interface_id = 0;
      PutBe32(packet, static_cast<uint32_t>(rec.direction));
    } else {
      interface_id = 1;
      packet.push_back(static_cast<uint8_t>(rec.direction));
    }
    Bytes encoded = h4::EncodeFrame(rec.frame);
    packet.insert(packet.end(), encoded.begin(), encoded.end());

    Bytes epb;
    PutLe32(epb, interface_id);
    PutLe32(epb, static_cast<uint32_t>(rec.timestamp_us >> 32));
    PutLe32(epb, static_cast<uint32_t>(rec.timestamp_us));
    PutLe32(epb, static_cast<uint32_t>(packet.size()));
    PutLe32(epb, static_cast<uint32_t>(packet.size()));
    epb.insert(epb.end(), packet.begin(), packet.end());
    Pad4(epb);
    PutLe32(epb, 0);
    PutBlock(out, kEpbType, std::move(epb));
  }
  return out;
}

void WritePcap(const std::vector<CaptureRecord>& records, const std::filesystem::path& path) {
  WriteFile(path, SerializePcapng(records));
}

BtsnoopImage SerializeBtsnoop(const std::vector<CaptureRecord>& records) {
  CheckOrdered(records);
  BtsnoopImage image;
  Bytes& out = image.data;
  const char magic[8] = {'b', 't', 's', 'n', 'o', 'o', 'p', '\0'};
  out.insert(out.end(), magic, magic + 8);
  PutBe32(out, 1);
  PutBe32(out, kBtsnoopDatalinkH4);
  for (const auto& rec : records) {
    if (!IsHciFrame(rec.frame)) {
      ++image.skipped;
      continue;
    }
    Bytes encoded = h4::EncodeFrame(rec.frame);
    uint32_t flags = rec.direction == Direction::kControllerToHost ? 1 : 0;
    if (rec.frame.type == h4::H4Type::kHciCommand || rec.frame.type == h4::H4Type::kHciEvent) flags |= 2;
    PutBe32(out, static_cast<uint32_t>(encoded.size()));
    PutBe32(out, static_cast<uint32_t>(encoded.size()));
    PutBe32(out, flags);
    PutBe32(out, 0);
    PutBe64(out, kBtsnoopEpochDelta + rec.timestamp_us);
    out.insert(out.end(), encoded.begin(), encoded.end());
  }
  return image;
}

size_t WriteBtsnoop(const std::vector<CaptureRecord>& records, const std::filesystem::path& path) {
  BtsnoopImage image = SerializeBtsnoop(records);
  WriteFile(path, image.data);
  return image.skipped;
}

std::string DescribeFrame(const h4::H4Frame& frame, Direction direction) {
  try {
    switch (frame.type) {
      case h4::H4Type::kHciCommand:
        return "CMD " + hci::DescribeCommand(h4::ParseCommand(frame));
      case h4::H4Type::kHciEvent:
        return "EVT " + hci::DescribeEvent(h4::ParseEvent(frame));
      case h4::H4Type::kAclData: {
        h4::AclPacket acl = h4::ParseAcl(frame);
        char head[48];
        std::snprintf(head, sizeof(head), "ACL handle=0x%04x len=%zu", acl.handle, acl.data.size());
        return std::string(head) + (acl.data.empty() ? "" : " [" + ToHex(acl.data) + "]");
      }
      case h4::H4Type::kScoData:
        return "SCO [" + ToHex(frame.payload) + "]";
      case h4::H4Type::kDiag: {
        std::string out = DescribeDiag(diag::FromFrame(frame));
        for (const auto& note : diag::AuditDiag(diag::FromFrame(frame), direction)) out += " !" + note;
        return out;
      }
      case h4::H4Type::kMsgQueuePut:
        return "MSGQ [" + ToHex(TrimZeros(frame.payload)) + "]";
      case h4::H4Type::kWiced:
        return "WICED [" + ToHex(TrimZeros(frame.payload)) + "]";
    }
  } catch (const Error&) {
  }
  ByteView body = frame.type == h4::H4Type::kDiag ? TrimZeros(frame.payload) : ByteView(frame.payload);
  return std::string(h4::H4TypeName(frame.type)) + " raw [" + ToHex(body) + "]";
}

std::string RenderLive(const CaptureRecord& record) {
  char stamp[32];
  std::snprintf(stamp, sizeof(stamp), "[%6llu.%06llu] ",
                static_cast<unsigned long long>(record.timestamp_us / 1000000),
                static_cast<unsigned long long>(record.timestamp_us % 1000000));
  return std::string(stamp) + std::string(DirectionArrow(record.direction)) + " " +
         DescribeFrame(record.frame, record.direction);
}

Bytes EncodeSniffRecord(const SniffRecord& record) {
  Bytes out{static_cast<uint8_t>(record.direction)};
  PutLe32(out, record.tick);
  Bytes frame = h4::EncodeFrame(record.frame);
  out.insert(out.end(), frame.begin(), frame.end());
  return out;
}

CaptureRecord ToCaptureRecord(const SniffRecord& record) {
  return {uint64_t{record.tick} * kMicrosPerTick, record.direction, record.frame};
}

std::vector<SniffRecord> SniffDecoder::Feed(ByteView chunk) {
  std::vector<SniffRecord> out;
  if (error_) return out;
  pending_.insert(pending_.end(), chunk.begin(), chunk.end());
  size_t pos = 0;
  try {
    while (pending_.size() - pos >= 6) {
      uint8_t dir = pending_[pos];
      if (dir > 1) {
        error_ = "bad direction octet " + Hex2(dir);
        break;
      }
      auto length = h4::FrameLength(ByteView(pending_).subspan(pos + 5));
      if (!length || pending_.size() - pos - 5 < *length) break;
      auto result = h4::DecodeStream(ByteView(pending_).subspan(pos + 5, *length));
      out.push_back({static_cast<Direction>(dir), GetLe32(pending_, pos + 1), std::move(result.frames.at(0))});
      pos += 5 + *length;
    }
  } catch (const Error& e) {
    error_ = e.what();
  }
  pending_.erase(pending_.begin(), pending_.begin() + static_cast<ptrdiff_t>(pos));
  return out;
}

}  // namespace btdiag::capture
