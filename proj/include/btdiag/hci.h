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

// The subset of HCI the emulator speaks, plus Broadcom vendor commands.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "btdiag/common.h"
#include "btdiag/h4.h"

namespace btdiag::hci {

namespace op {
inline constexpr uint16_t kCreateConnection = 0x0405;
inline constexpr uint16_t kDisconnect = 0x0406;
inline constexpr uint16_t kAuthenticationRequested = 0x0411;
inline constexpr uint16_t kSetConnectionEncryption = 0x0413;
inline constexpr uint16_t kUserConfirmationRequestReply = 0x042c;
inline constexpr uint16_t kReset = 0x0c03;
inline constexpr uint16_t kReadLocalVersion = 0x1001;
inline constexpr uint16_t kReadBdAddr = 0x1009;
inline constexpr uint16_t kEnableDeviceUnderTestMode = 0x1803;
inline constexpr uint16_t kLeCreateConnection = 0x200d;
// Broadcom vendor commands.
inline constexpr uint16_t kSuperDuperPeekPoke = 0xfc0c;
inline constexpr uint16_t kWriteRam = 0xfc4c;
inline constexpr uint16_t kReadRam = 0xfc4d;
inline constexpr uint16_t kSendLmpPdu = 0xfc58;
// Emulator-only: manages the LMP firewall allowlist.
inline constexpr uint16_t kFirewallControl = 0xfe01;
}  // namespace op

namespace evt {
inline constexpr uint8_t kConnectionComplete = 0x03;
inline constexpr uint8_t kDisconnectionComplete = 0x05;
inline constexpr uint8_t kEncryptionChange = 0x08;
inline constexpr uint8_t kCommandComplete = 0x0e;
inline constexpr uint8_t kCommandStatus = 0x0f;
inline constexpr uint8_t kHardwareError = 0x10;
inline constexpr uint8_t kNumberOfCompletedPackets = 0x13;
inline constexpr uint8_t kUserConfirmationRequest = 0x33;
inline constexpr uint8_t kSimplePairingComplete = 0x36;
inline constexpr uint8_t kLeMeta = 0x3e;
inline constexpr uint8_t kLeConnectionCompleteSubevent = 0x01;
}  // namespace evt

namespace status {
inline constexpr uint8_t kSuccess = 0x00;
inline constexpr uint8_t kUnknownCommand = 0x01;
inline constexpr uint8_t kUnknownConnectionId = 0x02;
inline constexpr uint8_t kPageTimeout = 0x04;
inline constexpr uint8_t kConnectionTimeout = 0x08;
inline constexpr uint8_t kCommandDisallowed = 0x0c;
inline constexpr uint8_t kInvalidParameters = 0x12;
inline constexpr uint8_t kRemoteUserTerminated = 0x13;
inline constexpr uint8_t kLocalHostTerminated = 0x16;
inline constexpr uint8_t kUnknownLmpPdu = 0x19;
inline constexpr uint8_t kInvalidLmpParameters = 0x1e;
}  // namespace status

inline constexpr uint16_t kBroadcomCompanyId = 0x000f;

std::string_view CommandName(uint16_t opcode);  // empty if unknown
std::string_view EventName(uint8_t code);       // empty if unknown

h4::H4Frame CommandComplete(uint16_t opcode, ByteView return_params);
h4::H4Frame CommandStatus(uint8_t status, uint16_t opcode);
h4::H4Frame ConnectionComplete(uint8_t status, uint16_t handle, const BdAddr& peer,
                               bool encrypted = false);
h4::H4Frame LeConnectionComplete(uint8_t status, uint16_t handle, uint8_t role,
                                 const BdAddr& peer);
h4::H4Frame DisconnectionComplete(uint16_t handle, uint8_t reason);
h4::H4Frame EncryptionChange(uint8_t status, uint16_t handle, bool enabled);
h4::H4Frame HardwareError(uint8_t code);
h4::H4Frame NumberOfCompletedPackets(uint16_t handle, uint16_t count);
h4::H4Frame UserConfirmationRequest(const BdAddr& peer, uint32_t numeric_value);
h4::H4Frame SimplePairingComplete(uint8_t status, const BdAddr& peer);

// Opcode answered by a Command Complete/Status event, if `evt` is one.
std::optional<uint16_t> AnsweredOpcode(const h4::HciEvent& evt);
// Status octet of events that carry one (CC with return params, CS,
// connection complete, ...). nullopt for events without a status.
std::optional<uint8_t> EventStatus(const h4::HciEvent& evt);

// One-line summaries used by live views.
std::string DescribeCommand(const h4::HciCommand& cmd);
std::string DescribeEvent(const h4::HciEvent& evt);

}  // namespace btdiag::hci
