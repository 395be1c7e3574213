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

#include "btdiag/diag.h"

#include <gtest/gtest.h>

#include <set>

#include "test_support.h"

namespace btdiag::diag {
namespace {

using testing::Gen;
using testing::Hex;

ErrorKind KindOf(ByteView payload) {
  try {
    ParseDiag(payload);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "parse succeeded for " << ToHex(payload);
  return ErrorKind::kIo;
}

TEST(DiagParse, LoggingToggle) {
  EXPECT_EQ(ParseDiag(Hex("f0 01")), (DiagMessage{DiagCode::kToggleLmpLogging, ToggleLmpLogging{true}}));
  EXPECT_EQ(ParseDiag(Hex("f0 00")), (DiagMessage{DiagCode::kToggleLmpLogging, ToggleLmpLogging{false}}));
  EXPECT_EQ(KindOf(Hex("f0 02")), ErrorKind::kMalformedBody);
}

TEST(DiagParse, PeekAtZero) {
  EXPECT_EQ(ParseDiag(Hex("f1 02 00 00 00 00")),
            (DiagMessage{DiagCode::kMemoryPeek, MemoryPeek{MemAccessType::kArm, 0}}));
}

TEST(DiagParse, AddressesAreLittleEndian) {
  EXPECT_EQ(ParseDiag(Hex("f1 03 00 04 20 00")),
            (DiagMessage{DiagCode::kMemoryPeek, MemoryPeek{MemAccessType::kBlueRf, 0x00200400}}));
  EXPECT_EQ(ParseDiag(Hex("f2 02 78 56 34 12 aa")),
            (DiagMessage{DiagCode::kMemoryPoke, MemoryPoke{MemAccessType::kArm, 0x12345678, 0xaa}}));
  EXPECT_EQ(ParseDiag(Hex("f3 04 00 04 20 00")), (DiagMessage{DiagCode::kMemoryHexdump, MemoryHexdump{0x00200400}}));
}

TEST(DiagParse, HexdumpResponseCarries32Octets) {
  Bytes wire = Hex("04 00 04 20 00");
  for (int i = 0; i < 32; ++i) wire.push_back(static_cast<uint8_t>(0x40 + i));
  DiagMessage m = ParseDiag(wire);
  const auto& r = std::get<HexdumpResponse>(m.body);
  EXPECT_EQ(r.address, 0x00200400u);
  EXPECT_EQ(r.data.size(), 32u);
  EXPECT_EQ(r.data[0], 0x40);
  EXPECT_EQ(r.data[31], 0x5f);
  wire.pop_back();
  EXPECT_EQ(KindOf(wire), ErrorKind::kMalformedBody);
}

TEST(DiagParse, AccessTypeRules) {
  EXPECT_EQ(KindOf(Hex("f1 04 00 00 00 00")), ErrorKind::kMalformedBody);
  EXPECT_EQ(KindOf(Hex("f2 04 00 00 00 00 01")), ErrorKind::kMalformedBody);
  EXPECT_EQ(KindOf(Hex("f3 02 00 00 00 00")), ErrorKind::kMalformedBody);
  EXPECT_EQ(KindOf(Hex("f3 03 00 00 00 00")), ErrorKind::kMalformedBody);
}

TEST(DiagParse, ShortAddressIsMalformed) {
  EXPECT_EQ(KindOf(Hex("f1 02 00 00 00")), ErrorKind::kMalformedBody);
  EXPECT_EQ(KindOf(Hex("f3 04 00")), ErrorKind::kMalformedBody);
}

TEST(DiagParse, UnknownCode) {
  for (uint8_t code : {0x02, 0x05, 0x12, 0x82, 0xc4, 0xf4, 0xff}) {
    EXPECT_EQ(KindOf(Bytes{code}), ErrorKind::kUnknownDiagCode) << int(code);
  }
  EXPECT_EQ(KindOf(Bytes{}), ErrorKind::kMalformedBody);
}

TEST(DiagParse, PaddingIsStrippedButJunkIsNot) {
  Bytes padded = Hex("f1 02 00 00 20 00");
  padded.resize(63, 0);
  EXPECT_EQ(ParseDiag(padded), MakePeek(MemAccessType::kArm, 0x00200000));
  padded[40] = 0x01;
  EXPECT_EQ(KindOf(padded), ErrorKind::kMalformedBody);
}

TEST(DiagParse, TestCompleted) {
  DiagMessage m = ParseDiag(Hex("0a 00 64 00 00 00 64 00"));
  EXPECT_EQ(m.body, DiagBody(TestCompleted{0, 100, 0, 100}));
  // Nonzero reserved parses but is flagged.
  DiagMessage odd = ParseDiag(Hex("0a 00 01 00 05 00 01 00"));
  EXPECT_EQ(std::get<TestCompleted>(odd.body).reserved, 5);
  auto notes = AuditDiag(odd, Direction::kControllerToHost);
  ASSERT_EQ(notes.size(), 1u);
  EXPECT_NE(notes[0].find("reserved"), std::string::npos);
  EXPECT_THROW(BuildDiag(odd), Error);
}

TEST(DiagParse, LmpRecordLayout) {
  Bytes wire = Hex("01 44 33 22 11");
  Bytes pdu = Hex("4e bf fe cf fe db ff 7b 87");
  wire.insert(wire.end(), pdu.begin(), pdu.end());
  wire.resize(1 + 4 + 17, 0);
  DiagMessage m = ParseDiag(wire);
  EXPECT_EQ(m.code, DiagCode::kLmpReceived);
  const auto& r = std::get<LmpLogRecord>(m.body);
  EXPECT_EQ(r.low_mac, (std::array<uint8_t, 4>{0x44, 0x33, 0x22, 0x11}));
  EXPECT_EQ(r.payload[0], 0x4e);
  EXPECT_EQ(r.payload.size(), 17u);
}

TEST(DiagParse, PeekResponseStatusIsOptional) {
  EXPECT_EQ(ParseDiag(Hex("03 5a")).body, DiagBody(PeekResponse{0x5a, 0}));
  EXPECT_EQ(ParseDiag(Hex("03 5a 01")).body, DiagBody(PeekResponse{0x5a, 1}));
  EXPECT_EQ(BuildDiag({DiagCode::kPeekResponse, PeekResponse{0x5a, 0}}), Hex("03 5a"));
}

TEST(DiagBuild, RequestLayouts) {
  EXPECT_EQ(BuildDiag(MakeToggle(true)), Hex("f0 01"));
  EXPECT_EQ(BuildDiag(MakeToggle(false)), Hex("f0 00"));
  EXPECT_EQ(BuildDiag(MakePeek(MemAccessType::kArm, 0x00200400)), Hex("f1 02 00 04 20 00"));
  EXPECT_EQ(BuildDiag(MakePeek(MemAccessType::kBlueRf, 0x10)), Hex("f1 03 10 00 00 00"));
  EXPECT_EQ(BuildDiag(MakePoke(MemAccessType::kArm, 0x00200400, 0x7f)), Hex("f2 02 00 04 20 00 7f"));
  EXPECT_EQ(BuildDiag(MakeHexdump(0x00200400)), Hex("f3 04 00 04 20 00"));
  EXPECT_EQ(BuildDiag(MakeStatsRequest(DiagCode::kGetBrAclStats)), Hex("c1"));
  EXPECT_EQ(BuildDiag(MakeStatsRequest(DiagCode::kResetBrAclStats)), Hex("b9"));
  TestParams p{5, 0, 10, 10, 0, 4, 27, 100};
  EXPECT_EQ(BuildDiag(MakeRunTest(p)), Hex("f6 05 00 0a 0a 00 04 1b 00 64 00"));
  EXPECT_THROW(BuildDiag(MakePeek(MemAccessType::kHexdumpArm, 0)), Error);
}

TEST(DiagBuild, ToFrameUsesEnvelope) {
  Bytes wire = h4::EncodeFrame(ToFrame(MakeToggle(true)));
  Bytes expected = Hex("07 f0 01");
  expected.resize(64, 0);
  EXPECT_EQ(wire, expected);
}

TEST(DiagBuild, StatsMustMatchSchema) {
  EXPECT_THROW(MakeStatsResponse(DiagCode::kBrAclStats, {1, 2}), Error);
  EXPECT_THROW(BuildDiag({DiagCode::kScoStats, StatsResponse{{DiagCode::kEscoStats, {1, 2, 3}}}}), Error);
  EXPECT_EQ(BuildDiag(MakeStatsResponse(DiagCode::kCpuLoadResponse, {0x11223344})), Hex("15 44 33 22 11"));
}

TEST(DiagBuild, RunTestLengthBound) {
  TestParams p;
  p.payload_length = 1022;
  EXPECT_THROW(BuildDiag(MakeRunTest(p)), Error);
  p.payload_length = 1021;
  EXPECT_NO_THROW(BuildDiag(MakeRunTest(p)));
}

TEST(DiagCodes, VocabularyAndDirections) {
  auto codes = AllDiagCodes();
  ASSERT_EQ(codes.size(), 27u);
  std::set<uint8_t> seen;
  for (DiagCode c : codes) {
    uint8_t v = static_cast<uint8_t>(c);
    EXPECT_TRUE(seen.insert(v).second);
    EXPECT_EQ(DiagCodeFromOctet(v), c);
    EXPECT_FALSE(DiagCodeName(c).empty());
    Direction expected = (v < 0xb9) ? Direction::kControllerToHost : Direction::kHostToController;
    EXPECT_EQ(DiagDirection(c), expected) << int(v);
  }
  int known = 0;
  for (int v = 0; v < 256; ++v) known += DiagCodeFromOctet(static_cast<uint8_t>(v)).has_value();
  EXPECT_EQ(known, 27);
}

TEST(DiagCodes, StatsSchemaSizes) {
  EXPECT_EQ(StatsSchema(DiagCode::kBrAclStats).size(), 5u);
  EXPECT_EQ(StatsSchema(DiagCode::kEdrAclStats).size(), 5u);
  EXPECT_EQ(StatsSchema(DiagCode::kScoStats).size(), 3u);
  EXPECT_EQ(StatsSchema(DiagCode::kEscoStats).size(), 3u);
  EXPECT_EQ(StatsSchema(DiagCode::kCpuLoadResponse).size(), 1u);
  EXPECT_EQ(StatsSchema(DiagCode::kAuxResponse).size(), 1u);
  EXPECT_EQ(StatsSchema(DiagCode::kConnectionResponse).size(), 4u);
  EXPECT_EQ(StatsResponseFor(DiagCode::kResetBrAclStats), DiagCode::kBrAclStats);
  EXPECT_EQ(StatsResponseFor(DiagCode::kGetEscoStats), DiagCode::kEscoStats);
  EXPECT_EQ(StatsResponseFor(DiagCode::kGetConnectionStats), DiagCode::kConnectionResponse);
}

TEST(DiagAudit, DirectionMismatchIsNoted) {
  EXPECT_TRUE(AuditDiag(MakeToggle(true), Direction::kHostToController).empty());
  EXPECT_EQ(AuditDiag(MakeToggle(true), Direction::kControllerToHost).size(), 1u);
}

TEST(DiagProperty, RoundTripRandomMessages) {
  Gen g(0xd1a9);
  std::set<DiagCode> covered;
  for (int i = 0; i < 10000; ++i) {
    DiagMessage m = RandomDiag(g);
    covered.insert(m.code);
    Bytes body = BuildDiag(m);
    ASSERT_LE(body.size(), 63u);
    ASSERT_EQ(ParseDiag(body), m) << ToHex(body);
    // Through the H4 envelope as well.
    Bytes wire = h4::EncodeFrame(ToFrame(m));
    ASSERT_EQ(wire.size(), 64u);
    h4::DecodeResult r = h4::DecodeStream(wire);
    ASSERT_EQ(r.frames.size(), 1u);
    ASSERT_EQ(FromFrame(r.frames[0]), m);
  }
  EXPECT_EQ(covered.size(), 27u);
}

TEST(DiagProperty, IncrementalDiagStream) {
  Gen g(0x1ac);
  Bytes stream;
  std::vector<DiagMessage> sent;
  for (int i = 0; i < 50; ++i) {
    sent.push_back(RandomDiag(g));
    Bytes e = h4::EncodeFrame(ToFrame(sent.back()));
    stream.insert(stream.end(), e.begin(), e.end());
  }
  for (size_t split = 0; split <= stream.size(); split += 7) {
    h4::StreamDecoder d;
    auto a = d.Feed(ByteView(stream).first(split));
    auto b = d.Feed(ByteView(stream).subspan(split));
    a.insert(a.end(), b.begin(), b.end());
    ASSERT_EQ(a.size(), sent.size());
    for (size_t i = 0; i < a.size(); ++i) ASSERT_EQ(FromFrame(a[i]), sent[i]);
  }
}

}  // namespace
}  // namespace btdiag::diag
