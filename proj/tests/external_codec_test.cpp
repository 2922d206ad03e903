#include "vcmc/codec/external.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include "support/synthetic.hpp"
#include "vcmc/codec.hpp"

namespace vcmc::codec {
namespace {

namespace fs = std::filesystem;

class ExternalCodecTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("vcmc_ext_" + std::string(::testing::UnitTest::GetInstance()
                                          ->current_test_info()
                                          ->name()));
    fs::remove_all(dir_);
    seq_ = vcmc::testing::ToYuv420(vcmc::testing::MovingShapes(16, 8, 3, 2, 25.0));
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
  VideoSequence seq_;
};

TEST_F(ExternalCodecTest, PassThroughTemplates) {
  ExternalCodecSpec spec{"cp {input} {output}", "cp {input} {output}", 30};
  const ExternalResult r = encode_external(seq_, spec, 37, dir_ / "work dir");
  EXPECT_EQ(r.decoded, seq_);
  const auto size = fs::file_size(r.coded_path);
  EXPECT_EQ(size, dataio::Yuv420FrameBytes(16, 8) * 3);
  EXPECT_EQ(r.stats.total_bits, 8 * size);
  EXPECT_DOUBLE_EQ(r.stats.bitrate_kbps, measure_bitrate(size, 3, 25.0));
  EXPECT_EQ(r.coded_bytes.size(), size);
}

TEST_F(ExternalCodecTest, PlaceholdersAreSubstituted) {
  ExternalCodecSpec spec{
      "echo {qp} {width} {height} {frames} {fps} > " + (dir_ / "args.txt").string() +
          " && cp {input} {output}",
      "cp {input} {output}", 30};
  encode_external(seq_, spec, 41, dir_);
  std::ifstream in(dir_ / "args.txt");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "41 16 8 3 25");
}

TEST_F(ExternalCodecTest, MissingOutputPlaceholderFailsBeforeSpawning) {
  ExternalCodecSpec spec{"cp {input} /dev/null", "cp {input} {output}", 30};
  try {
    encode_external(seq_, spec, 30, dir_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
  }
  EXPECT_FALSE(fs::exists(dir_));
}

TEST_F(ExternalCodecTest, NonzeroExitCarriesStatusAndStderr) {
  ExternalCodecSpec spec{"echo encoder-said-no {input} {output} >&2; exit 1",
                         "cp {input} {output}", 30};
  try {
    encode_external(seq_, spec, 30, dir_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProcess);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("status 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("encoder-said-no"), std::string::npos) << msg;
  }
}

TEST_F(ExternalCodecTest, Timeout) {
  ExternalCodecSpec spec{"sleep 5; cp {input} {output}", "cp {input} {output}", 0.2};
  const auto t0 = std::chrono::steady_clock::now();
  try {
    encode_external(seq_, spec, 30, dir_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProcess);
    EXPECT_NE(std::string(e.what()).find("timed out"), std::string::npos);
  }
  EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(3));
}

TEST_F(ExternalCodecTest, MissingAndOddSizedOutputs) {
  ExternalCodecSpec no_file{"true {input} {output}", "cp {input} {output}", 30};
  EXPECT_THROW(encode_external(seq_, no_file, 30, dir_), Error);

  ExternalCodecSpec short_decode{"cp {input} {output}", "head -c 10 {input} > {output}", 30};
  try {
    encode_external(seq_, short_decode, 30, dir_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProcess);
    EXPECT_NE(std::string(e.what()).find("bytes"), std::string::npos);
  }
}

TEST_F(ExternalCodecTest, ViaCodecConfig) {
  CodecConfig c;
  c.kind = CodecKind::kExternal;
  c.qp = 33;
  c.external = ExternalCodecSpec{"cp {input} {output}", "cp {input} {output}", 30};
  const CodedResult r = code_sequence(seq_, c, dir_);
  EXPECT_EQ(r.decoded, seq_);
  EXPECT_EQ(r.stats.frames, 3);
}

TEST(ShellQuoteTest, QuotesSingleQuotes) {
  EXPECT_EQ(detail::ShellQuote("a b"), "'a b'");
  EXPECT_EQ(detail::ShellQuote("it's"), "'it'\\''s'");
}

}  // namespace
}  // namespace vcmc::codec
