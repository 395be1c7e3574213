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

#include "btdiag/memory.h"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <utility>

namespace btdiag::emu {

MemoryImage MemoryImage::Default(std::string_view banner) {
  MemoryImage image;
  MemoryRegion arm{kDefaultArmBase, MemKind::kArm, Bytes(kDefaultArmSize, 0)};
  std::copy_n(banner.begin(), std::min<size_t>(banner.size(), arm.contents.size()),
              arm.contents.begin());
  image.AddRegion(std::move(arm));
  image.AddRegion({kDefaultBlueRfBase, MemKind::kBlueRf, Bytes(kDefaultBlueRfSize, 0)});
  return image;
}

void MemoryImage::AddRegion(MemoryRegion region) {
  if (region.contents.empty()) throw Error(ErrorKind::kInvariantViolation, "empty memory region");
  if (region.end() > 0x100000000ull) {
    throw Error(ErrorKind::kInvariantViolation, "memory region exceeds 32-bit space");
  }
  for (const auto& r : regions_) {
    if (r.kind == region.kind && region.base < r.end() && r.base < region.end()) {
      throw Error(ErrorKind::kInvariantViolation, "memory regions overlap");
    }
  }
  regions_.push_back(std::move(region));
}

void MemoryImage::LoadFile(MemKind kind, uint32_t base, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read memory image " + path.string());
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (data.empty()) return;
  if (WriteBlock(kind, base, data)) return;
  AddRegion({base, kind, std::move(data)});
}

const MemoryRegion* MemoryImage::Find(MemKind kind, uint32_t address) const {
  for (const auto& r : regions_) {
    if (r.kind == kind && address >= r.base && address < r.end()) return &r;
  }
  return nullptr;
}

MemoryRegion* MemoryImage::Find(MemKind kind, uint32_t address) {
  return const_cast<MemoryRegion*>(std::as_const(*this).Find(kind, address));
}

std::optional<uint8_t> MemoryImage::Read(MemKind kind, uint32_t address) const {
  const MemoryRegion* r = Find(kind, address);
  if (!r) return std::nullopt;
  return r->contents[address - r->base];
}

bool MemoryImage::Write(MemKind kind, uint32_t address, uint8_t value) {
  MemoryRegion* r = Find(kind, address);
  if (!r) return false;
  r->contents[address - r->base] = value;
  return true;
}

std::optional<Bytes> MemoryImage::ReadBlock(MemKind kind, uint32_t address, size_t length) const {
  const MemoryRegion* r = Find(kind, address);
  if (!r || address + static_cast<uint64_t>(length) > r->end()) return std::nullopt;
  auto first = r->contents.begin() + (address - r->base);
  return Bytes(first, first + static_cast<ptrdiff_t>(length));
}

bool MemoryImage::WriteBlock(MemKind kind, uint32_t address, ByteView data) {
  MemoryRegion* r = Find(kind, address);
  if (!r || address + static_cast<uint64_t>(data.size()) > r->end()) return false;
  std::copy(data.begin(), data.end(), r->contents.begin() + (address - r->base));
  return true;
}

}  // namespace btdiag::emu
