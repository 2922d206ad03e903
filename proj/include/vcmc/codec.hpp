#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vcmc/codec/builtin.hpp"
#include "vcmc/codec/common.hpp"
#include "vcmc/codec/external.hpp"
#include "vcmc/error.hpp"
#include "vcmc/imagecore.hpp"

namespace vcmc::codec {

enum class CodecKind { kBuiltin, kExternal };

struct CodecConfig {
  CodecKind kind = CodecKind::kBuiltin;
  int qp = 32;
  std::optional<ExternalCodecSpec> external;

  void Validate() const {
    if (kind == CodecKind::kBuiltin) {
      CheckQp(qp);
      return;
    }
    if (!external) {
      throw Error(ErrorCode::kConfig, "external codec selected without spec");
    }
    external->Validate();
  }
};

// Result of one encode+decode round trip through either codec.
struct CodedResult {
  std::vector<uint8_t> coded;
  VideoSequence decoded;
  CodingStats stats;
};

// `workdir` is only touched by the external codec.
inline CodedResult code_sequence(const VideoSequence& yuv,
                                 const CodecConfig& config,
                                 const std::filesystem::path& workdir) {
  config.Validate();
  if (config.kind == CodecKind::kBuiltin) {
    Bitstream bs = encode_builtin(yuv, config.qp);
    CodedResult r;
    r.decoded = decode_builtin(bs, yuv.fps);
    r.stats = MakeStats(bs.bytes.size(), static_cast<int64_t>(yuv.frames.size()),
                        yuv.fps);
    r.coded = std::move(bs.bytes);
    return r;
  }
  ExternalResult ext = encode_external(yuv, *config.external, config.qp, workdir);
  return {std::move(ext.coded_bytes), std::move(ext.decoded), ext.stats};
}

}  // namespace vcmc::codec
