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

#include "btdiag/hci.h"

#include <cstdio>

namespace btdiag::hci {
namespace {

std::string Hex4(uint16_t v) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "0x%04x", v);
  return buf;
}

std::string Hex2(uint8_t v) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "0x%02x", v);
  return buf;
}

h4::H4Frame Event(uint8_t code, Bytes params) {
  return h4::MakeEventFrame({code, std::move(params)});
}

void PutAddr(Bytes& out, const BdAddr& addr) {
  out.insert(out.end(), addr.octets.begin(), addr.octets.end());
}

}  // namespace

std::string_view CommandName(uint16_t opcode) {
  switch (opcode) {
    case op::kCreateConnection: return "Create_Connection";
    case op::kDisconnect: return "Disconnect";
    case op::kAuthenticationRequested: return "Authentication_Requested";
    case op::kSetConnectionEncryption: return "Set_Connection_Encryption";
    case op::kUserConfirmationRequestReply: return "User_Confirmation_Request_Reply";
    case op::kReset: return "Reset";
    case op::kReadLocalVersion: return "Read_Local_Version_Information";
    case op::kReadBdAddr: return "Read_BD_ADDR";
    case op::kEnableDeviceUnderTestMode: return "Enable_Device_Under_Test_Mode";
    case op::kLeCreateConnection: return "LE_Create_Connection";
    case op::kSuperDuperPeekPoke: return "SuperDuperPeekPoke";
    case op::kWriteRam: return "Write_RAM";
    case op::kReadRam: return "Read_RAM";
    case op::kSendLmpPdu: return "SendLmpPdu";
    case op::kFirewallControl: return "Firewall_Control";
    default: return {};
  }
}

std::string_view EventName(uint8_t code) {
  switch (code) {
    case evt::kConnectionComplete: return "Connection_Complete";
    case evt::kDisconnectionComplete: return "Disconnection_Complete";
    case evt::kEncryptionChange: return "Encryption_Change";
    case evt::kCommandComplete: return "Command_Complete";
    case evt::kCommandStatus: return "Command_Status";
    case evt::kHardwareError: return "Hardware_Error";
    case evt::kNumberOfCompletedPackets: return "Number_Of_Completed_Packets";
    case evt::kUserConfirmationRequest: return "User_Confirmation_Request";
    case evt::kSimplePairingComplete: return "Simple_Pairing_Complete";
    case evt::kLeMeta: return "LE_Meta";
    default: return {};
  }
}

h4::H4Frame CommandComplete(uint16_t opcode, ByteView return_params) {
  Bytes p{1};
  PutLe16(p, opcode);
  p.insert(p.end(), return_params.begin(), return_params.end());
  return Event(evt::kCommandComplete, std::move(p));
}

h4::H4Frame CommandStatus(uint8_t status, uint16_t opcode) {
  Bytes p{status, 1};
  PutLe16(p, opcode);
  return Event(evt::kCommandStatus, std::move(p));
}

h4::H4Frame ConnectionComplete(uint8_t status, uint16_t handle, const BdAddr& peer,
                               bool encrypted) {
  Bytes p{status};
  PutLe16(p, handle);
  PutAddr(p, peer);
  p.push_back(0x01);  // ACL link
  p.push_back(encrypted ? 1 : 0);
  return Event(evt::kConnectionComplete, std::move(p));
}

h4::H4Frame LeConnectionComplete(uint8_t status, uint16_t handle, uint8_t role,
                                 const BdAddr& peer) {
  Bytes p{evt::kLeConnectionCompleteSubevent, status};
  PutLe16(p, handle);
  p.push_back(role);
  p.push_back(0x00);  // public peer address
  PutAddr(p, peer);
  PutLe16(p, 0x0018);  // interval, 30 ms
  PutLe16(p, 0x0000);  // latency
  PutLe16(p, 0x0048);  // supervision timeout, 720 ms
  p.push_back(0x00);
  return Event(evt::kLeMeta, std::move(p));
}

h4::H4Frame DisconnectionComplete(uint16_t handle, uint8_t reason) {
  Bytes p{status::kSuccess};
  PutLe16(p, handle);
  p.push_back(reason);
  return Event(evt::kDisconnectionComplete, std::move(p));
}

h4::H4Frame EncryptionChange(uint8_t status, uint16_t handle, bool enabled) {
  Bytes p{status};
  PutLe16(p, handle);
  p.push_back(enabled ? 1 : 0);
  return Event(evt::kEncryptionChange, std::move(p));
}

h4::H4Frame HardwareError(uint8_t code) { return Event(evt::kHardwareError, {code}); }

h4::H4Frame NumberOfCompletedPackets(uint16_t handle, uint16_t count) {
  Bytes p{1};
  PutLe16(p, handle);
  PutLe16(p, count);
  return Event(evt::kNumberOfCompletedPackets, std::move(p));
}

h4::H4Frame UserConfirmationRequest(const BdAddr& peer, uint32_t numeric_value) {
  Bytes p;
  PutAddr(p, peer);
  PutLe32(p, numeric_value);
  return Event(evt::kUserConfirmationRequest, std::move(p));
}

h4::H4Frame SimplePairingComplete(uint8_t status, const BdAddr& peer) {
  Bytes p{status};
  PutAddr(p, peer);
  return Event(evt::kSimplePairingComplete, std::move(p));
}

std::optional<uint16_t> AnsweredOpcode(const h4::HciEvent& e) {
  if (e.event_code == evt::kCommandComplete && e.params.size() >= 3) return GetLe16(e.params, 1);
  if (e.event_code == evt::kCommandStatus && e.params.size() >= 4) return GetLe16(e.params, 2);
  return std::nullopt;
}

std::optional<uint8_t> EventStatus(const h4::HciEvent& e) {
  switch (e.event_code) {
    case evt::kCommandComplete:
      if (e.params.size() >= 4) return e.params[3];
      return std::nullopt;
    case evt::kCommandStatus:
    case evt::kConnectionComplete:
    case evt::kDisconnectionComplete:
    case evt::kEncryptionChange:
    case evt::kSimplePairingComplete:
      if (!e.params.empty()) return e.params[0];
      return std::nullopt;
    case evt::kHardwareError:
      // Any hardware error is a failure regardless of its code.
      return uint8_t{0xff};
    case evt::kLeMeta:
      if (e.params.size() >= 2 && e.params[0] == evt::kLeConnectionCompleteSubevent) {
        return e.params[1];
      }
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

std::string DescribeCommand(const h4::HciCommand& cmd) {
  std::string name(CommandName(cmd.opcode));
  if (name.empty()) name = "Unknown_Command";
  std::string out = name + " (" + Hex4(cmd.opcode) + ")";
  if (!cmd.params.empty()) out += " [" + ToHex(cmd.params) + "]";
  return out;
}

std::string DescribeEvent(const h4::HciEvent& e) {
  std::string name(EventName(e.event_code));
  if (name.empty()) name = "Unknown_Event(" + Hex2(e.event_code) + ")";
  std::string out = name;
  if (auto opcode = AnsweredOpcode(e)) {
    std::string cmd(CommandName(*opcode));
    out += " for " + (cmd.empty() ? std::string("Unknown_Command") : cmd) + " (" + Hex4(*opcode) + ")";
  }
  if (auto st = EventStatus(e); st && e.event_code != evt::kHardwareError) {
    out += " status=" + Hex2(*st);
  }
  size_t skip = 0;
  if (e.event_code == evt::kCommandComplete) skip = 3;
  if (e.event_code == evt::kCommandStatus) skip = 4;
  if (e.params.size() > skip) {
    out += " [" + ToHex(ByteView(e.params).subspan(skip)) + "]";
  }
  return out;
}

}  // namespace btdiag::hci
