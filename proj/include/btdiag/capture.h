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

// Captured traffic: live text rendering, pcapng and BTSnoop export, and the
// record format of the sniff stream.
//
// pcapng files carry two interfaces:
//   0  LINKTYPE_BLUETOOTH_HCI_H4_WITH_PHDR (201): 4-octet big-endian direction
//      (0 = host->controller, 1 = controller->host), then the H4 frame.
//   1  LINKTYPE_USER0 (147): 1-octet direction, then the 64-octet envelope
//      of a diagnostic, MsgQueuePut or WICED frame.
// The user link type has no registered dissector; analyzers show it raw.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "btdiag/common.h"
#include "btdiag/h4.h"

namespace btdiag::capture {

inline constexpr uint16_t kLinkTypeH4WithPhdr = 201;
inline constexpr uint16_t kLinkTypeDiag = 147;
inline constexpr uint32_t kBtsnoopDatalinkH4 = 1002;
inline constexpr uint32_t kMicrosPerTick = 625;

struct CaptureRecord {
  uint64_t timestamp_us = 0;  // since capture start
  Direction direction = Direction::kHostToController;
  h4::H4Frame frame;

  bool operator==(const CaptureRecord&) const = default;
};

// True for frame types BTSnoop and the H4 link type can carry.
bool IsHciFrame(const h4::H4Frame& frame);

// Both throw Error{kInvariantViolation} if timestamps decrease and
// Error{kIo} if the file cannot be written.
Bytes SerializePcapng(const std::vector<CaptureRecord>& records);
void WritePcap(const std::vector<CaptureRecord>& records, const std::filesystem::path& path);

struct BtsnoopImage {
  Bytes data;
  size_t skipped = 0;
};
BtsnoopImage SerializeBtsnoop(const std::vector<CaptureRecord>& records);
// Returns the number of non-HCI records left out.
size_t WriteBtsnoop(const std::vector<CaptureRecord>& records, const std::filesystem::path& path);

// One-line summary of a frame, without timestamp or direction.
std::string DescribeFrame(const h4::H4Frame& frame, Direction direction);
// "[   0.001250] C->H " + DescribeFrame(...). Never throws.
std::string RenderLive(const CaptureRecord& record);

// Sniff stream record: direction(1) + tick(4, little-endian) + H4 frame.
struct SniffRecord {
  Direction direction = Direction::kHostToController;
  uint32_t tick = 0;
  h4::H4Frame frame;

  bool operator==(const SniffRecord&) const = default;
};

Bytes EncodeSniffRecord(const SniffRecord& record);
CaptureRecord ToCaptureRecord(const SniffRecord& record);

// Incremental sniff stream decoder. After a malformed record it stops and
// reports the failure via error().
class SniffDecoder {
 public:
  std::vector<SniffRecord> Feed(ByteView chunk);
  const std::optional<std::string>& error() const { return error_; }

 private:
  Bytes pending_;
  std::optional<std::string> error_;
};

}  // namespace btdiag::capture
