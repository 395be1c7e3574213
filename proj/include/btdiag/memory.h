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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "btdiag/common.h"

namespace btdiag::emu {

enum class MemKind : uint8_t { kArm, kBlueRf };

struct MemoryRegion {
  uint32_t base = 0;
  MemKind kind = MemKind::kArm;
  Bytes contents;

  uint64_t end() const { return static_cast<uint64_t>(base) + contents.size(); }
  bool operator==(const MemoryRegion&) const = default;
};

// Synthetic chip memory. Regions of one kind never overlap; accesses outside
// every region fail instead of wrapping.
class MemoryImage {
 public:
  static constexpr uint32_t kDefaultArmBase = 0x00200000;
  static constexpr uint32_t kDefaultArmSize = 256 * 1024;
  static constexpr uint32_t kDefaultBlueRfBase = 0x00000000;
  static constexpr uint32_t kDefaultBlueRfSize = 4 * 1024;

  // One zeroed ARM region with `banner` written at its base, one BlueRF region.
  static MemoryImage Default(std::string_view banner);

  // Throws Error{kInvariantViolation} on overlap with a region of the same kind.
  void AddRegion(MemoryRegion region);
  // Replaces bytes at `base` with the file contents, adding a region when the
  // range is not mapped yet. Throws Error{kIo} if the file cannot be read.
  void LoadFile(MemKind kind, uint32_t base, const std::filesystem::path& path);

  std::optional<uint8_t> Read(MemKind kind, uint32_t address) const;
  bool Write(MemKind kind, uint32_t address, uint8_t value);
  // All-or-nothing block access.
  std::optional<Bytes> ReadBlock(MemKind kind, uint32_t address, size_t length) const;
  bool WriteBlock(MemKind kind, uint32_t address, ByteView data);

  const std::vector<MemoryRegion>& regions() const { return regions_; }
  bool operator==(const MemoryImage&) const = default;

 private:
  const MemoryRegion* Find(MemKind kind, uint32_t address) const;
  MemoryRegion* Find(MemKind kind, uint32_t address);

  std::vector<MemoryRegion> regions_;
};

}  // namespace btdiag::emu
