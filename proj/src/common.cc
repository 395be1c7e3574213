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

#include "btdiag/common.h"

#include <cctype>
#include <charconv>

namespace btdiag {
namespace {

int HexNibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string_view StripHexPrefix(std::string_view text) {
  if (text.size() >= 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    text.remove_prefix(2);
  }
  return text;
}

}  // namespace

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUnknownH4Type: return "UnknownH4Type";
    case ErrorKind::kInvariantViolation: return "InvariantViolation";
    case ErrorKind::kUnknownDiagCode: return "UnknownDiagCode";
    case ErrorKind::kMalformedBody: return "MalformedBody";
    case ErrorKind::kUnknownOpcode: return "UnknownOpcode";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kUnknownVendorSubtype: return "UnknownVendorSubtype";
    case ErrorKind::kAlreadyLinked: return "AlreadyLinked";
    case ErrorKind::kParse: return "Parse";
    case ErrorKind::kIo: return "Io";
  }
  return "Unknown";
}

std::string_view DirectionArrow(Direction dir) {
  return dir == Direction::kHostToController ? "H->C" : "C->H";
}

BdAddr BdAddr::FromString(std::string_view text) {
  Bytes be;
  for (size_t i = 0; i < text.size();) {
    if (text[i] == ':' || text[i] == '-') {
      ++i;
      continue;
    }
    if (i + 1 >= text.size()) break;
    int hi = HexNibble(text[i]);
    int lo = HexNibble(text[i + 1]);
    if (hi < 0 || lo < 0) break;
    be.push_back(static_cast<uint8_t>(hi << 4 | lo));
    i += 2;
  }
  if (be.size() != 6) {
    throw Error(ErrorKind::kParse, "bad MAC address '" + std::string(text) + "'");
  }
  BdAddr addr;
  for (size_t i = 0; i < 6; ++i) addr.octets[i] = be[5 - i];
  return addr;
}

BdAddr BdAddr::FromLittleEndian(ByteView bytes) {
  if (bytes.size() < 6) {
    throw Error(ErrorKind::kMalformedBody, "short device address");
  }
  BdAddr addr;
  for (size_t i = 0; i < 6; ++i) addr.octets[i] = bytes[i];
  return addr;
}

std::string BdAddr::ToString() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (int i = 5; i >= 0; --i) {
    out += kDigits[octets[i] >> 4];
    out += kDigits[octets[i] & 0xf];
    if (i) out += ':';
  }
  return out;
}

uint32_t BdAddr::Low32() const { return GetLe32(octets, 0); }

std::string ToHex(ByteView bytes, std::string_view separator) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * (2 + separator.size()));
  for (size_t i = 0; i < bytes.size(); ++i) {
    if (i) out += separator;
    out += kDigits[bytes[i] >> 4];
    out += kDigits[bytes[i] & 0xf];
  }
  return out;
}

Bytes ParseHex(std::string_view text) {
  std::string digits;
  size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c)) || c == ':' || c == ',') {
      ++i;
      continue;
    }
    if (c == '0' && i + 1 < text.size() && (text[i + 1] == 'x' || text[i + 1] == 'X')) {
      i += 2;
      continue;
    }
    if (HexNibble(c) < 0) {
      throw Error(ErrorKind::kParse, "bad hex digit in '" + std::string(text) + "'");
    }
    digits += c;
    ++i;
  }
  if (digits.size() % 2) {
    throw Error(ErrorKind::kParse, "odd number of hex digits in '" + std::string(text) + "'");
  }
  Bytes out;
  for (size_t j = 0; j < digits.size(); j += 2) {
    out.push_back(static_cast<uint8_t>(HexNibble(digits[j]) << 4 | HexNibble(digits[j + 1])));
  }
  return out;
}

uint32_t ParseHexNumber(std::string_view text) {
  std::string_view digits = StripHexPrefix(text);
  uint32_t value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value, 16);
  if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size()) {
    throw Error(ErrorKind::kParse, "bad hex number '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace btdiag
