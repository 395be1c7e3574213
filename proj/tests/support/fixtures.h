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

// Byte fixtures frozen from independent derivations. The pcapng, BTSnoop and
// hash values below come from tests/oracle/derive_fixtures.py (Python struct
// packing against the published file layouts); rerun it if a data file or
// export layout changes deliberately.

#pragma once

#include <cstdint>

#include "btdiag/common.h"

namespace btdiag::testing {

// FNV-1a 64 of the checked-in data files.
inline constexpr uint64_t kLmpTableHash = 0xd08b6412051feb72ull;
inline constexpr uint64_t kLcpTableHash = 0xcf529d54fc2a2efcull;
inline constexpr uint64_t kConnectionSetupHash = 0xa297fe7f7493f556ull;
inline constexpr uint64_t kLeConnectionSetupHash = 0x34b5f47dbe0a5b7aull;

inline constexpr uint64_t kBtsnoopEpochDelta = 0x00dcddb30f2f8000ull;

// Capture used for both goldens: (timestamp_us, direction, encoded frame)
//   0     H->C  01 01 10 00                       Read_Local_Version
//   1250  H->C  07 f0 01 + 61 zero octets          logging on
//   1875  C->H  04 0e 0c 01 01 10 00 07 09 61 07 0f 00 09 41
//   2500  C->H  02 0b 00 04 00 01 02 fe 07         ACL
inline const Bytes kGoldenPcapng = {
    0x0a, 0x0d, 0x0d, 0x0a, 0x2c, 0x00, 0x00, 0x00, 0x4d, 0x3c, 0x2b, 0x1a, 0x01, 0x00, 0x00, 0x00,
    0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0x04, 0x00, 0x06, 0x00, 0x62, 0x74, 0x64, 0x69,
    0x61, 0x67, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x2c, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00,
    0x48, 0x00, 0x00, 0x00, 0xc9, 0x00, 0x00, 0x00, 0xff, 0xff, 0x00, 0x00, 0x02, 0x00, 0x02, 0x00,
    0x68, 0x34, 0x00, 0x00, 0x03, 0x00, 0x23, 0x00, 0x48, 0x43, 0x49, 0x20, 0x48, 0x34, 0x20, 0x77,
    0x69, 0x74, 0x68, 0x20, 0x64, 0x69, 0x72, 0x65, 0x63, 0x74, 0x69, 0x6f, 0x6e, 0x20, 0x70, 0x73,
    0x65, 0x75, 0x64, 0x6f, 0x2d, 0x68, 0x65, 0x61, 0x64, 0x65, 0x72, 0x00, 0x00, 0x00, 0x00, 0x00,
    0x48, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x5c, 0x00, 0x00, 0x00, 0x93, 0x00, 0x00, 0x00,
    0xff, 0xff, 0x00, 0x00, 0x02, 0x00, 0x04, 0x00, 0x64, 0x69, 0x61, 0x67, 0x03, 0x00, 0x36, 0x00,
    0x42, 0x72, 0x6f, 0x61, 0x64, 0x63, 0x6f, 0x6d, 0x20, 0x64, 0x69, 0x61, 0x67, 0x6e, 0x6f, 0x73,
    0x74, 0x69, 0x63, 0x20, 0x65, 0x6e, 0x76, 0x65, 0x6c, 0x6f, 0x70, 0x65, 0x2c, 0x20, 0x31, 0x2d,
    0x6f, 0x63, 0x74, 0x65, 0x74, 0x20, 0x64, 0x69, 0x72, 0x65, 0x63, 0x74, 0x69, 0x6f, 0x6e, 0x20,
    0x70, 0x72, 0x65, 0x66, 0x69, 0x78, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x5c, 0x00, 0x00, 0x00,
    0x06, 0x00, 0x00, 0x00, 0x2c, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
    0x00, 0x00, 0x00, 0x00, 0x08, 0x00, 0x00, 0x00, 0x08, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
    0x01, 0x01, 0x10, 0x00, 0x00, 0x00, 0x00, 0x00, 0x2c, 0x00, 0x00, 0x00, 0x06, 0x00, 0x00, 0x00,
    0x68, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0xe2, 0x04, 0x00, 0x00,
    0x41, 0x00, 0x00, 0x00, 0x41, 0x00, 0x00, 0x00, 0x00, 0x07, 0xf0, 0x01, 0x00, 0x00, 0x00, 0x00,
    0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
    0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
    0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
    0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
    0x68, 0x00, 0x00, 0x00, 0x06, 0x00, 0x00, 0x00, 0x38, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
    0x00, 0x00, 0x00, 0x00, 0x53, 0x07, 0x00, 0x00, 0x13, 0x00, 0x00, 0x00, 0x13, 0x00, 0x00, 0x00,
    0x00, 0x00, 0x00, 0x01, 0x04, 0x0e, 0x0c, 0x01, 0x01, 0x10, 0x00, 0x07, 0x09, 0x61, 0x07, 0x0f,
    0x00, 0x09, 0x41, 0x00, 0x00, 0x00, 0x00, 0x00, 0x38, 0x00, 0x00, 0x00, 0x06, 0x00, 0x00, 0x00,
    0x34, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0xc4, 0x09, 0x00, 0x00,
    0x0d, 0x00, 0x00, 0x00, 0x0d, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x01, 0x02, 0x0b, 0x00, 0x04,
    0x00, 0x01, 0x02, 0xfe, 0x07, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x34, 0x00, 0x00, 0x00,
};

inline const Bytes kGoldenBtsnoop = {
    0x62, 0x74, 0x73, 0x6e, 0x6f, 0x6f, 0x70, 0x00, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x03, 0xea,
    0x00, 0x00, 0x00, 0x04, 0x00, 0x00, 0x00, 0x04, 0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x00,
    0x00, 0xdc, 0xdd, 0xb3, 0x0f, 0x2f, 0x80, 0x00, 0x01, 0x01, 0x10, 0x00, 0x00, 0x00, 0x00, 0x0f,
    0x00, 0x00, 0x00, 0x0f, 0x00, 0x00, 0x00, 0x03, 0x00, 0x00, 0x00, 0x00, 0x00, 0xdc, 0xdd, 0xb3,
    0x0f, 0x2f, 0x87, 0x53, 0x04, 0x0e, 0x0c, 0x01, 0x01, 0x10, 0x00, 0x07, 0x09, 0x61, 0x07, 0x0f,
    0x00, 0x09, 0x41, 0x00, 0x00, 0x00, 0x09, 0x00, 0x00, 0x00, 0x09, 0x00, 0x00, 0x00, 0x01, 0x00,
    0x00, 0x00, 0x00, 0x00, 0xdc, 0xdd, 0xb3, 0x0f, 0x2f, 0x89, 0xc4, 0x02, 0x0b, 0x00, 0x04, 0x00,
    0x01, 0x02, 0xfe, 0x07,
};


}  // namespace btdiag::testing
