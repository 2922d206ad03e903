#include "vcmc/codec.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "support/synthetic.hpp"

namespace vcmc::codec {
namespace {

std::string Bits(const std::vector<uint8_t>& bytes, size_t n) {
  std::string s;
  for (size_t i = 0; i < n; ++i) s += ((bytes[i / 8] >> (7 - i % 8)) & 1) ? '1' : '0';
  return s;
}

VideoSequence Single(const Frame& f) {
  VideoSequence s;
  s.frames.push_back(f);
  return s;
}

TEST(QstepTest, Examples) {
  EXPECT_EQ(qstep_from_qp(4), 1.0);
  EXPECT_EQ(qstep_from_qp(10), 2.0);
  EXPECT_NEAR(qstep_from_qp(32), 25.398416831491192, 1e-12);
  EXPECT_THROW(qstep_from_qp(-1), Error);
  EXPECT_THROW(qstep_from_qp(64), Error);
}

TEST(BitrateTest, Examples) {
  EXPECT_DOUBLE_EQ(measure_bitrate(1000, 30, 30.0), 8.0);
  EXPECT_EQ(measure_bitrate(0, 7, 24.0), 0.0);
  EXPECT_DOUBLE_EQ(measure_bitrate(2500, 10, 24.0), 48.0);
  EXPECT_THROW(measure_bitrate(10, 0, 30.0), Error);
  const CodingStats s = MakeStats(125, 5, 25.0);
  EXPECT_EQ(s.total_bits, 1000u);
  EXPECT_DOUBLE_EQ(s.bitrate_kbps, 1000.0 * 25.0 / 5 / 1000.0);
}

TEST(BitIoTest, ExpGolombCodewords) {
  BitWriter w;
  w.PutUe(0);  // 1
  w.PutUe(1);  // 010
  w.PutUe(2);  // 011
  w.PutUe(3);  // 00100
  w.PutSe(-1);  // codeNum 2 -> 011
  w.PutSe(2);   // codeNum 3 -> 00100
  const size_t n = w.bit_count();
  const auto bytes = std::move(w).Finish();
  EXPECT_EQ(Bits(bytes, n), "1" "010" "011" "00100" "011" "00100");
}

TEST(BitIoTest, SignedRoundTrip) {
  BitWriter w;
  for (int64_t v = -300; v <= 300; ++v) w.PutSe(v);
  w.PutSe(1 << 20);
  const auto bytes = std::move(w).Finish();
  BitReader r(bytes);
  for (int64_t v = -300; v <= 300; ++v) ASSERT_EQ(r.GetSe(), v);
  EXPECT_EQ(r.GetSe(), 1 << 20);
}

TEST(DctTest, MatchesDirectFormula) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> d(-128, 127);
  Block8 in{};
  for (double& v : in) v = d(rng);
  const Block8 got = ForwardDct(in);
  for (int u = 0; u < 8; ++u) {
    for (int v = 0; v < 8; ++v) {
      const double cu = u == 0 ? std::sqrt(0.125) : 0.5;
      const double cv = v == 0 ? std::sqrt(0.125) : 0.5;
      double acc = 0.0;
      for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
          acc += in[y * 8 + x] * std::cos((2 * y + 1) * u * std::numbers::pi / 16) *
                 std::cos((2 * x + 1) * v * std::numbers::pi / 16);
        }
      }
      EXPECT_NEAR(got[u * 8 + v], cu * cv * acc, 1e-9);
    }
  }
  const Block8 back = InverseDct(got);
  for (int i = 0; i < 64; ++i) EXPECT_NEAR(back[i], in[i], 1e-9);
}

TEST(DctTest, ZigzagIsAPermutationStartingAlongTheFirstRow) {
  std::array<bool, 64> seen{};
  for (int i : kZigzag) seen[i] = true;
  for (bool b : seen) EXPECT_TRUE(b);
  EXPECT_EQ(kZigzag[1], 1);
  EXPECT_EQ(kZigzag[2], 8);
  EXPECT_EQ(kZigzag[63], 63);
}

TEST(BitstreamTest, HeaderLayout) {
  const Bitstream bs = encode_builtin(Single(Frame(ColorFormat::kYuv420, 16, 8, 128)), 22);
  const std::vector<uint8_t> expected_header = {
      'T', 'I', 'C', '1', 1,                      // magic, version
      0, 0, 0, 16, 0, 0, 0, 8, 0, 0, 0, 1,        // luma w, h, frames
      3,                                          // planes
      0, 0, 0, 16, 0, 0, 0, 8,                    // Y
      0, 0, 0, 8, 0, 0, 0, 4,                     // Cb
      0, 0, 0, 8, 0, 0, 0, 4,                     // Cr
      22};
  ASSERT_GE(bs.bytes.size(), expected_header.size());
  EXPECT_TRUE(std::equal(expected_header.begin(), expected_header.end(), bs.bytes.begin()));
  EXPECT_EQ(bs.header.byte_size(), expected_header.size());
  EXPECT_EQ(ParseHeader(bs.bytes), bs.header);
}

TEST(BitstreamTest, MidGrayCodesEveryBlockAsZero) {
  for (int qp : {0, 4, 30, 63}) {
    const VideoSequence seq = Single(Frame(ColorFormat::kYuv420, 24, 16, 128));
    const Bitstream bs = encode_builtin(seq, qp);
    // 3x2 luma blocks + 2 x (2x1) chroma blocks = 10 zero flags -> 2 bytes.
    const std::vector<uint8_t> payload(bs.bytes.begin() + bs.header.byte_size(),
                                       bs.bytes.end());
    EXPECT_EQ(payload, (std::vector<uint8_t>{0, 0})) << "qp " << qp;
    EXPECT_EQ(decode_builtin(bs), seq);
  }
}

TEST(BitstreamTest, Deterministic) {
  std::mt19937 rng(3);
  const VideoSequence seq = testing::ToYuv420(testing::MovingShapes(32, 24, 3, 5));
  EXPECT_EQ(encode_builtin(seq, 27).bytes, encode_builtin(seq, 27).bytes);
}

TEST(BitstreamTest, CoarserQpGivesFewerBytes) {
  const Frame g = testing::Gradient(16, 16, ColorFormat::kRgb444, 0.4, 0, 255);
  const VideoSequence seq = Single(rgb_to_yuv420(g));
  EXPECT_LT(encode_builtin(seq, 40).bytes.size(), encode_builtin(seq, 4).bytes.size());
}

TEST(BitstreamTest, NearLosslessAtUnitStep) {
  for (uint32_t seed : {1u, 2u, 3u}) {
    const VideoSequence seq = testing::ToYuv420(testing::MovingShapes(40, 24, 2, seed));
    const VideoSequence dec = decode_builtin(encode_builtin(seq, 4));
    EXPECT_GE(psnr(dec, seq), 50.0);
  }
}

TEST(BitstreamTest, RoundTripPreservesShape) {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int w = 2 * (1 + trial % 13), h = 2 * (1 + (trial * 5) % 11);
    VideoSequence seq;
    seq.fps = 25.0;
    for (int f = 0; f < 1 + trial % 3; ++f) {
      seq.frames.push_back(testing::UniformNoise(w, h, ColorFormat::kYuv420, rng));
    }
    const int qp = (trial * 7) % 64;
    const VideoSequence dec = decode_builtin(encode_builtin(seq, qp), 25.0);
    ASSERT_EQ(dec.frames.size(), seq.frames.size());
    for (size_t f = 0; f < dec.frames.size(); ++f) {
      EXPECT_TRUE(dec.frames[f].SameLayout(seq.frames[f]));
    }
  }
}

TEST(BitstreamTest, GrayInputSupported) {
  std::mt19937 rng(2);
  const VideoSequence seq = Single(testing::NaturalTexture(20, 12, ColorFormat::kGray, rng));
  const VideoSequence dec = decode_builtin(encode_builtin(seq, 4));
  EXPECT_EQ(dec.format(), ColorFormat::kGray);
  EXPECT_GE(psnr(dec, seq), 50.0);
}

TEST(BitstreamTest, RejectsBadInput) {
  EXPECT_THROW(encode_builtin(Single(Frame(ColorFormat::kRgb444, 8, 8)), 10), Error);
  EXPECT_THROW(encode_builtin(Single(Frame(ColorFormat::kYuv420, 8, 8)), 64), Error);
  EXPECT_THROW(encode_builtin(VideoSequence{}, 10), Error);
}

ErrorCode DecodeError(const std::vector<uint8_t>& bytes) {
  try {
    decode_builtin(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "decode unexpectedly succeeded";
  return ErrorCode::kArgument;
}

TEST(BitstreamTest, DistinctParseErrors) {
  const VideoSequence seq = testing::ToYuv420(testing::MovingShapes(16, 16, 2, 4));
  const std::vector<uint8_t> good = encode_builtin(seq, 20).bytes;

  auto bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_EQ(DecodeError(bad_magic), ErrorCode::kBadMagic);

  auto truncated = good;
  truncated.pop_back();
  EXPECT_EQ(DecodeError(truncated), ErrorCode::kTruncated);

  auto trailing = good;
  trailing.push_back(0);
  EXPECT_EQ(DecodeError(trailing), ErrorCode::kTrailingData);

  auto bad_version = good;
  bad_version[4] = 9;
  EXPECT_EQ(DecodeError(bad_version), ErrorCode::kCorruptPayload);

  EXPECT_EQ(DecodeError({}), ErrorCode::kTruncated);
  EXPECT_EQ(DecodeError({'T', 'I'}), ErrorCode::kTruncated);
  EXPECT_EQ(DecodeError({'X'}), ErrorCode::kBadMagic);
}

TEST(BitstreamTest, EveryPrefixIsRejected) {
  const VideoSequence seq = testing::ToYuv420(testing::MovingShapes(16, 8, 2, 9));
  const std::vector<uint8_t> good = encode_builtin(seq, 30).bytes;
  for (size_t len = 0; len < good.size(); ++len) {
    const std::vector<uint8_t> prefix(good.begin(), good.begin() + len);
    EXPECT_THROW(decode_builtin(prefix), Error) << "prefix length " << len;
  }
}

TEST(CodecConfigTest, Validation) {
  CodecConfig c;
  c.qp = 63;
  EXPECT_NO_THROW(c.Validate());
  c.qp = 64;
  EXPECT_THROW(c.Validate(), Error);
  c.kind = CodecKind::kExternal;
  EXPECT_THROW(c.Validate(), Error);
}

TEST(CodeSequenceTest, BuiltinStatsMatchBitstream) {
  const VideoSequence seq = testing::ToYuv420(testing::MovingShapes(16, 16, 4, 1, 24.0));
  CodecConfig c;
  c.qp = 30;
  const CodedResult r = code_sequence(seq, c, "unused");
  EXPECT_EQ(r.coded, encode_builtin(seq, 30).bytes);
  EXPECT_EQ(r.stats.total_bits, r.coded.size() * 8);
  EXPECT_DOUBLE_EQ(r.stats.bitrate_kbps, measure_bitrate(r.coded.size(), 4, 24.0));
  EXPECT_EQ(r.decoded.frames.size(), 4u);
}

}  // namespace
}  // namespace vcmc::codec
