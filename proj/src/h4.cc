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

#include "btdiag/h4.h"

#include <string>

namespace btdiag::h4 {
namespace {

// Octets needed after the type tag before the total payload size is known.
size_t HeaderSize(H4Type type) {
  switch (type) {
    case H4Type::kHciCommand: return 3;
    case H4Type::kAclData: return 4;
    case H4Type::kScoData: return 3;
    case H4Type::kHciEvent: return 2;
    default: return 0;
  }
}

// Payload size implied by a complete header.
size_t PayloadSize(H4Type type, ByteView header) {
  switch (type) {
    case H4Type::kHciCommand: return 3 + header[2];
    case H4Type::kAclData: return 4 + GetLe16(header, 2);
    case H4Type::kScoData: return 3 + header[2];
    case H4Type::kHciEvent: return 2 + header[1];
    default: return kEnvelopePayloadSize;
  }
}

[[noreturn]] void Violation(const std::string& what) {
  throw Error(ErrorKind::kInvariantViolation, what);
}

}  // namespace

std::optional<H4Type> H4TypeFromOctet(uint8_t octet) {
  switch (octet) {
    case 0x01:
    case 0x02:
    case 0x03:
    case 0x04:
    case 0x07:
    case 0x0a:
    case 0x19:
      return static_cast<H4Type>(octet);
    default:
      return std::nullopt;
  }
}

std::string_view H4TypeName(H4Type type) {
  switch (type) {
    case H4Type::kHciCommand: return "HCI_CMD";
    case H4Type::kAclData: return "ACL";
    case H4Type::kScoData: return "SCO";
    case H4Type::kHciEvent: return "HCI_EVT";
    case H4Type::kDiag: return "DIAG";
    case H4Type::kMsgQueuePut: return "MSGQ";
    case H4Type::kWiced: return "WICED";
  }
  return "?";
}

bool IsEnvelopeType(H4Type type) {
  return type == H4Type::kDiag || type == H4Type::kMsgQueuePut || type == H4Type::kWiced;
}

bool IsDirectionLegal(H4Type type, Direction dir) {
  if (type == H4Type::kHciCommand) return dir == Direction::kHostToController;
  if (type == H4Type::kHciEvent) return dir == Direction::kControllerToHost;
  return true;
}

H4Frame MakeCommandFrame(const HciCommand& cmd) {
  if (cmd.params.size() > 255) Violation("HCI command parameters exceed 255 octets");
  H4Frame frame{H4Type::kHciCommand, {}};
  PutLe16(frame.payload, cmd.opcode);
  frame.payload.push_back(static_cast<uint8_t>(cmd.params.size()));
  frame.payload.insert(frame.payload.end(), cmd.params.begin(), cmd.params.end());
  return frame;
}

H4Frame MakeEventFrame(const HciEvent& evt) {
  if (evt.params.size() > 255) Violation("HCI event parameters exceed 255 octets");
  H4Frame frame{H4Type::kHciEvent, {evt.event_code, static_cast<uint8_t>(evt.params.size())}};
  frame.payload.insert(frame.payload.end(), evt.params.begin(), evt.params.end());
  return frame;
}

H4Frame MakeAclFrame(uint16_t handle, ByteView data, uint8_t pb_bc_flags) {
  if (data.size() > 0xffff) Violation("ACL data too long");
  H4Frame frame{H4Type::kAclData, {}};
  PutLe16(frame.payload, static_cast<uint16_t>((handle & 0x0fff) | (pb_bc_flags << 12)));
  PutLe16(frame.payload, static_cast<uint16_t>(data.size()));
  frame.payload.insert(frame.payload.end(), data.begin(), data.end());
  return frame;
}

H4Frame MakeEnvelopeFrame(H4Type type, ByteView body) {
  if (!IsEnvelopeType(type)) Violation("not an envelope H4 type");
  if (body.size() > kEnvelopePayloadSize) Violation("envelope body exceeds 63 octets");
  H4Frame frame{type, Bytes(body.begin(), body.end())};
  frame.payload.resize(kEnvelopePayloadSize, 0);
  return frame;
}

HciCommand ParseCommand(const H4Frame& frame) {
  if (frame.type != H4Type::kHciCommand) Violation("frame is not an HCI command");
  ValidateFrame(frame);
  return {GetLe16(frame.payload, 0), Bytes(frame.payload.begin() + 3, frame.payload.end())};
}

HciEvent ParseEvent(const H4Frame& frame) {
  if (frame.type != H4Type::kHciEvent) Violation("frame is not an HCI event");
  ValidateFrame(frame);
  return {frame.payload[0], Bytes(frame.payload.begin() + 2, frame.payload.end())};
}

AclPacket ParseAcl(const H4Frame& frame) {
  if (frame.type != H4Type::kAclData) Violation("frame is not ACL data");
  ValidateFrame(frame);
  uint16_t word = GetLe16(frame.payload, 0);
  return {static_cast<uint16_t>(word & 0x0fff), static_cast<uint8_t>(word >> 12),
          Bytes(frame.payload.begin() + 4, frame.payload.end())};
}

void ValidateFrame(const H4Frame& frame) {
  size_t header = HeaderSize(frame.type);
  if (frame.payload.size() < header) Violation("payload shorter than its header");
  size_t expected = PayloadSize(frame.type, frame.payload);
  if (frame.payload.size() != expected) {
    Violation(std::string(H4TypeName(frame.type)) + " payload is " +
              std::to_string(frame.payload.size()) + " octets, header implies " +
              std::to_string(expected));
  }
}

Bytes EncodeFrame(const H4Frame& frame) {
  ValidateFrame(frame);
  Bytes out;
  out.reserve(frame.payload.size() + 1);
  out.push_back(static_cast<uint8_t>(frame.type));
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  return out;
}

std::optional<size_t> FrameLength(ByteView buffer) {
  if (buffer.empty()) return std::nullopt;
  auto type = H4TypeFromOctet(buffer[0]);
  if (!type) throw Error(ErrorKind::kUnknownH4Type, "unknown H4 type octet");
  size_t header = HeaderSize(*type);
  if (buffer.size() - 1 < header) return std::nullopt;
  return 1 + PayloadSize(*type, buffer.subspan(1, header));
}

DecodeResult DecodeStream(ByteView buffer) {
  DecodeResult result;
  size_t pos = 0;
  while (pos < buffer.size()) {
    auto type = H4TypeFromOctet(buffer[pos]);
    if (!type) {
      result.error = DecodeError{pos, buffer[pos]};
      break;
    }
    size_t header = HeaderSize(*type);
    if (buffer.size() - pos - 1 < header) break;
    size_t payload = PayloadSize(*type, buffer.subspan(pos + 1, header));
    if (buffer.size() - pos - 1 < payload) break;
    auto body = buffer.subspan(pos + 1, payload);
    result.frames.push_back({*type, Bytes(body.begin(), body.end())});
    pos += 1 + payload;
  }
  result.consumed = pos;
  return result;
}

std::vector<H4Frame> StreamDecoder::Feed(ByteView chunk) {
  if (error_) return {};
  pending_.insert(pending_.end(), chunk.begin(), chunk.end());
  DecodeResult result = DecodeStream(pending_);
  if (result.error) {
    error_ = DecodeError{consumed_ + result.error->offset, result.error->octet};
  }
  consumed_ += result.consumed;
  pending_.erase(pending_.begin(), pending_.begin() + static_cast<ptrdiff_t>(result.consumed));
  return std::move(result.frames);
}

std::vector<DirectionWarning> AuditDirections(const std::vector<H4Frame>& frames,
                                              Direction dir) {
  std::vector<DirectionWarning> warnings;
  for (size_t i = 0; i < frames.size(); ++i) {
    if (!IsDirectionLegal(frames[i].type, dir)) warnings.push_back({i, frames[i].type, dir});
  }
  return warnings;
}

}  // namespace btdiag::h4
