#pragma once

// Experiment configuration (JSON). Unknown keys are rejected; relative paths
// resolve against the directory holding the config file.
//
// {
//   "source": {"kind": "yuv420" | "image_dir", "path": str, "width": int,
//              "height": int, "fps": real, "frame_limit": int},
//   "annotations": str, "output_dir": str, "detections_dir": str,
//   "alpha": 0.25, "scale": 0.5,
//   "qp_list_proposed": [32..45], "qp_list_anchor": [35..47],
//   "codec": {"kind": "builtin"} |
//            {"kind": "external", "encode": str, "decode": str, "timeout": real},
//   "confidence_threshold": 0.25, "iou_threshold": 0.5,
//   "jobs": 1, "write_decoded_frames": true
// }

#include <filesystem>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vcmc/codec.hpp"
#include "vcmc/dataio/annotations.hpp"
#include "vcmc/dataio/image_dir.hpp"
#include "vcmc/dataio/yuv.hpp"
#include "vcmc/error.hpp"

namespace vcmc::dataio {

struct SequenceSource {
  enum class Kind { kYuv420File, kImageDir };
  Kind kind = Kind::kYuv420File;
  std::filesystem::path path;
  int width = 0;   // YUV420 only
  int height = 0;  // YUV420 only
  double fps = 0.0;
  std::optional<int> frame_limit;
};

inline std::vector<int> QpRange(int first, int last) {
  std::vector<int> v(static_cast<size_t>(last - first + 1));
  std::iota(v.begin(), v.end(), first);
  return v;
}

inline std::vector<int> DefaultProposedQps() { return QpRange(32, 45); }
inline std::vector<int> DefaultAnchorQps() { return QpRange(35, 47); }

struct ExperimentConfig {
  SequenceSource source;
  double alpha = 0.25;
  double scale = 0.5;  // per-axis downsampling factor
  std::vector<int> qp_list_proposed = DefaultProposedQps();
  std::vector<int> qp_list_anchor = DefaultAnchorQps();
  codec::CodecConfig codec;
  double confidence_threshold = 0.25;
  double iou_threshold = 0.5;
  std::filesystem::path annotations;
  std::optional<std::filesystem::path> detections_dir;
  std::filesystem::path output_dir;
  int jobs = 1;
  bool write_decoded_frames = true;

  void Validate() const {
    auto fail = [](const std::string& m) { throw Error(ErrorCode::kConstraint, m); };
    if (!(alpha >= 0.0 && alpha <= 1.0)) fail("alpha must lie in [0,1]");
    if (!(scale > 0.0 && scale <= 1.0)) fail("scale must lie in (0,1]");
    if (qp_list_proposed.empty()) fail("qp_list_proposed is empty");
    if (qp_list_anchor.empty()) fail("qp_list_anchor is empty");
    for (const auto* list : {&qp_list_proposed, &qp_list_anchor}) {
      for (int qp : *list) {
        if (qp < codec::kMinQp || qp > codec::kMaxQp) {
          fail("qp " + std::to_string(qp) + " outside [0,63]");
        }
      }
    }
    if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0)) {
      fail("confidence_threshold must lie in [0,1]");
    }
    if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0)) {
      fail("iou_threshold must lie in [0,1]");
    }
    if (jobs < 1) fail("jobs must be >= 1");
    if (!(source.fps > 0.0)) fail("source.fps must be > 0");
    if (source.kind == SequenceSource::Kind::kYuv420File &&
        (source.width < 2 || source.height < 2 || source.width % 2 != 0 ||
         source.height % 2 != 0)) {
      fail("YUV420 source needs even width/height >= 2");
    }
    if (source.frame_limit && *source.frame_limit < 1) fail("frame_limit must be >= 1");
    if (codec.kind == codec::CodecKind::kExternal) {
      if (!codec.external) fail("external codec needs templates");
      codec.external->Validate();
    }
  }
};

namespace detail {

inline std::string AsString(const json& v, const std::string& where) {
  if (!v.is_string()) throw Error(ErrorCode::kTypeMismatch, where + ": expected a string");
  return v.get<std::string>();
}

inline std::vector<int> AsQpList(const json& v, const std::string& where) {
  if (!v.is_array()) throw Error(ErrorCode::kTypeMismatch, where + ": expected an array");
  std::vector<int> out;
  for (const json& e : v) out.push_back(static_cast<int>(AsInt(e, where)));
  return out;
}

inline std::filesystem::path Resolve(const std::filesystem::path& base,
                                     const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

inline SequenceSource ParseSource(const json& j, const std::filesystem::path& base) {
  if (!j.is_object()) throw Error(ErrorCode::kTypeMismatch, "source must be an object");
  RejectUnknownKeys(j, {"kind", "path", "width", "height", "fps", "frame_limit"},
                    "source");
  SequenceSource s;
  const std::string kind = AsString(Require(j, "kind", "source"), "source.kind");
  if (kind == "yuv420") {
    s.kind = SequenceSource::Kind::kYuv420File;
    s.width = static_cast<int>(AsInt(Require(j, "width", "source"), "source.width"));
    s.height = static_cast<int>(AsInt(Require(j, "height", "source"), "source.height"));
  } else if (kind == "image_dir") {
    s.kind = SequenceSource::Kind::kImageDir;
    if (j.contains("width") || j.contains("height")) {
      throw Error(ErrorCode::kConstraint, "image_dir source takes dims from the files");
    }
  } else {
    throw Error(ErrorCode::kConstraint, "source.kind must be yuv420 or image_dir");
  }
  s.path = Resolve(base, AsString(Require(j, "path", "source"), "source.path"));
  s.fps = AsReal(Require(j, "fps", "source"), "source.fps");
  if (j.contains("frame_limit")) {
    s.frame_limit = static_cast<int>(AsInt(j["frame_limit"], "source.frame_limit"));
  }
  return s;
}

inline codec::CodecConfig ParseCodec(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kTypeMismatch, "codec must be an object");
  codec::CodecConfig c;
  const std::string kind = AsString(Require(j, "kind", "codec"), "codec.kind");
  if (kind == "builtin") {
    RejectUnknownKeys(j, {"kind"}, "codec");
    c.kind = codec::CodecKind::kBuiltin;
    return c;
  }
  if (kind != "external") {
    throw Error(ErrorCode::kConstraint, "codec.kind must be builtin or external");
  }
  RejectUnknownKeys(j, {"kind", "encode", "decode", "timeout"}, "codec");
  c.kind = codec::CodecKind::kExternal;
  codec::ExternalCodecSpec spec;
  spec.encode_template = AsString(Require(j, "encode", "codec"), "codec.encode");
  spec.decode_template = AsString(Require(j, "decode", "codec"), "codec.decode");
  if (j.contains("timeout")) spec.timeout_seconds = AsReal(j["timeout"], "codec.timeout");
  c.external = spec;
  return c;
}

}  // namespace detail

inline codec::CodecConfig parse_codec_config(const nlohmann::json& j) {
  codec::CodecConfig c = detail::ParseCodec(j);
  if (c.external) {
    try {
      c.external->Validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfig, e.message());
    }
  }
  return c;
}

inline ExperimentConfig parse_config(const nlohmann::json& j,
                                     const std::filesystem::path& base_dir = {}) {
  using detail::AsInt;
  using detail::AsReal;
  using detail::AsString;
  using detail::Require;
  if (!j.is_object()) throw Error(ErrorCode::kTypeMismatch, "config must be an object");
  detail::RejectUnknownKeys(
      j,
      {"source", "alpha", "scale", "qp_list_proposed", "qp_list_anchor", "codec",
       "confidence_threshold", "iou_threshold", "annotations", "detections_dir",
       "output_dir", "jobs", "write_decoded_frames"},
      "config");
  ExperimentConfig c;
  c.source = detail::ParseSource(Require(j, "source", "config"), base_dir);
  c.annotations = detail::Resolve(
      base_dir, AsString(Require(j, "annotations", "config"), "annotations"));
  c.output_dir = detail::Resolve(
      base_dir, AsString(Require(j, "output_dir", "config"), "output_dir"));
  if (j.contains("alpha")) c.alpha = AsReal(j["alpha"], "alpha");
  if (j.contains("scale")) c.scale = AsReal(j["scale"], "scale");
  if (j.contains("qp_list_proposed")) {
    c.qp_list_proposed = detail::AsQpList(j["qp_list_proposed"], "qp_list_proposed");
  }
  if (j.contains("qp_list_anchor")) {
    c.qp_list_anchor = detail::AsQpList(j["qp_list_anchor"], "qp_list_anchor");
  }
  if (j.contains("codec")) c.codec = detail::ParseCodec(j["codec"]);
  if (j.contains("confidence_threshold")) {
    c.confidence_threshold = AsReal(j["confidence_threshold"], "confidence_threshold");
  }
  if (j.contains("iou_threshold")) {
    c.iou_threshold = AsReal(j["iou_threshold"], "iou_threshold");
  }
  if (j.contains("detections_dir")) {
    c.detections_dir = detail::Resolve(
        base_dir, AsString(j["detections_dir"], "detections_dir"));
  }
  if (j.contains("jobs")) c.jobs = static_cast<int>(AsInt(j["jobs"], "jobs"));
  if (j.contains("write_decoded_frames")) {
    if (!j["write_decoded_frames"].is_boolean()) {
      throw Error(ErrorCode::kTypeMismatch, "write_decoded_frames: expected a bool");
    }
    c.write_decoded_frames = j["write_decoded_frames"].get<bool>();
  }
  c.Validate();
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(detail::ParseJsonFile(path), path.parent_path());
}

inline VideoSequence load_sequence(const SequenceSource& src) {
  if (src.kind == SequenceSource::Kind::kYuv420File) {
    return read_yuv420(src.path, src.width, src.height, src.fps, src.frame_limit);
  }
  return read_image_dir(src.path, src.fps, src.frame_limit);
}

}  // namespace vcmc::dataio
