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

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace btdiag {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;

enum class ErrorKind {
  kUnknownH4Type,
  kInvariantViolation,
  kUnknownDiagCode,
  kMalformedBody,
  kUnknownOpcode,
  kLengthMismatch,
  kUnknownVendorSubtype,
  kAlreadyLinked,
  kParse,
  kIo,
};

std::string_view ErrorKindName(ErrorKind kind);

// All codec and emulator failures are reported as this exception type; the
// kind lets callers branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

enum class Direction : uint8_t {
  kHostToController = 0,
  kControllerToHost = 1,
};

std::string_view DirectionArrow(Direction dir);

// A 48-bit Bluetooth device address. Octets are held in over-the-air
// (little-endian) order, so `octets[0..3]` are the low four octets used by
// diagnostic LMP records. Text form is the usual big-endian colon notation.
struct BdAddr {
  std::array<uint8_t, 6> octets{};

  static BdAddr FromString(std::string_view text);
  static BdAddr FromLittleEndian(ByteView bytes);

  std::string ToString() const;
  std::array<uint8_t, 4> Low4() const {
    return {octets[0], octets[1], octets[2], octets[3]};
  }
  uint32_t Low32() const;

  auto operator<=>(const BdAddr&) const = default;
};

// Hex helpers. Parsing accepts an optional 0x prefix, whitespace and colons.
std::string ToHex(ByteView bytes, std::string_view separator = " ");
Bytes ParseHex(std::string_view text);
uint32_t ParseHexNumber(std::string_view text);

inline void PutLe16(Bytes& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
}

inline void PutLe32(Bytes& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

inline uint16_t GetLe16(ByteView in, size_t off) {
  return static_cast<uint16_t>(in[off] | (in[off + 1] << 8));
}

inline uint32_t GetLe32(ByteView in, size_t off) {
  return static_cast<uint32_t>(in[off]) | (static_cast<uint32_t>(in[off + 1]) << 8) |
         (static_cast<uint32_t>(in[off + 2]) << 16) |
         (static_cast<uint32_t>(in[off + 3]) << 24);
}

}  // namespace btdiag
