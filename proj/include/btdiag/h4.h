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

// H4 serial framing. One type octet precedes every packet on the UART; the
// standard HCI types carry their own length fields, while the three Broadcom
// proprietary types use a fixed 64-octet envelope (type + 63 payload octets).

#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "btdiag/common.h"

namespace btdiag::h4 {

enum class H4Type : uint8_t {
  kHciCommand = 0x01,
  kAclData = 0x02,
  kScoData = 0x03,
  kHciEvent = 0x04,
  kDiag = 0x07,
  kMsgQueuePut = 0x0a,
  kWiced = 0x19,
};

inline constexpr size_t kEnvelopeSize = 64;
inline constexpr size_t kEnvelopePayloadSize = kEnvelopeSize - 1;

std::optional<H4Type> H4TypeFromOctet(uint8_t octet);
std::string_view H4TypeName(H4Type type);
bool IsEnvelopeType(H4Type type);

// False for HCI commands travelling controller->host and events travelling
// host->controller. Everything else is bidirectional.
bool IsDirectionLegal(H4Type type, Direction dir);

struct H4Frame {
  H4Type type = H4Type::kHciCommand;
  Bytes payload;

  bool operator==(const H4Frame&) const = default;
};

struct HciCommand {
  uint16_t opcode = 0;
  Bytes params;

  bool operator==(const HciCommand&) const = default;
};

struct HciEvent {
  uint8_t event_code = 0;
  Bytes params;

  bool operator==(const HciEvent&) const = default;
};

inline constexpr uint16_t MakeOpcode(uint8_t ogf, uint16_t ocf) {
  return static_cast<uint16_t>((ogf << 10) | (ocf & 0x03ff));
}

H4Frame MakeCommandFrame(const HciCommand& cmd);
H4Frame MakeEventFrame(const HciEvent& evt);
H4Frame MakeAclFrame(uint16_t handle, ByteView data, uint8_t pb_bc_flags = 0x2);
// Pads `body` with zeros to the 63-octet envelope payload.
H4Frame MakeEnvelopeFrame(H4Type type, ByteView body);

HciCommand ParseCommand(const H4Frame& frame);
HciEvent ParseEvent(const H4Frame& frame);

struct AclPacket {
  uint16_t handle = 0;
  uint8_t flags = 0;  // packet boundary + broadcast flags (upper nibble)
  Bytes data;
};
AclPacket ParseAcl(const H4Frame& frame);

// Throws Error{kInvariantViolation} when the payload disagrees with the
// length fields of its type.
void ValidateFrame(const H4Frame& frame);
Bytes EncodeFrame(const H4Frame& frame);

struct DecodeError {
  size_t offset = 0;  // absolute octet offset of the offending type tag
  uint8_t octet = 0;

  bool operator==(const DecodeError&) const = default;
};

struct DecodeResult {
  std::vector<H4Frame> frames;
  size_t consumed = 0;
  // Set when an unknown type octet stops decoding; `consumed` then equals
  // the offset of that octet. No resynchronisation is attempted.
  std::optional<DecodeError> error;
};

DecodeResult DecodeStream(ByteView buffer);

// Encoded size of the frame starting at buffer[0], once its header is
// complete (the frame itself may still be partial). Throws
// Error{kUnknownH4Type} on a bad type octet.
std::optional<size_t> FrameLength(ByteView buffer);

// Resumable decoder for one byte stream. Not thread safe; owned by a single
// stream consumer.
class StreamDecoder {
 public:
  std::vector<H4Frame> Feed(ByteView chunk);

  const std::optional<DecodeError>& error() const { return error_; }
  size_t buffered() const { return pending_.size(); }
  size_t total_consumed() const { return consumed_; }

 private:
  Bytes pending_;
  size_t consumed_ = 0;
  std::optional<DecodeError> error_;
};

struct DirectionWarning {
  size_t index = 0;
  H4Type type = H4Type::kHciCommand;
  Direction direction = Direction::kHostToController;
};

// Flags frames whose type is not legal in the given direction. Purely
// advisory; nothing is rejected.
std::vector<DirectionWarning> AuditDirections(const std::vector<H4Frame>& frames,
                                              Direction dir);

}  // namespace btdiag::h4
