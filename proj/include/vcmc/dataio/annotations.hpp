#pragma once

// Ground-truth and detection files share one JSON schema:
//   {"frames": [{"frame_id": int,
//                "objects": [{"class_id": int, "bbox": [x, y, w, h],
//                             "score": real}]}],
//    "info": {...}}
// "score" is required in detection files and forbidden in annotation files.
// "info" is optional free-form metadata; any other key is rejected.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vcmc/detmetrics.hpp"
#include "vcmc/error.hpp"

namespace vcmc::dataio {

namespace detail {

using nlohmann::json;

inline json ParseJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedJson, path.string() + ": " + e.what());
  }
}

inline const json& Require(const json& obj, const char* key,
                           const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorCode::kMissingKey, where + ": missing \"" + key + "\"");
  }
  return *it;
}

inline void RejectUnknownKeys(const json& obj,
                              std::initializer_list<const char*> allowed,
                              const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) {
      throw Error(ErrorCode::kUnknownKey, where + ": unknown key \"" + key + "\"");
    }
  }
}

inline int64_t AsInt(const json& v, const std::string& where) {
  if (!v.is_number_integer()) {
    throw Error(ErrorCode::kTypeMismatch, where + ": expected an integer");
  }
  return v.get<int64_t>();
}

inline double AsReal(const json& v, const std::string& where) {
  if (!v.is_number()) {
    throw Error(ErrorCode::kTypeMismatch, where + ": expected a number");
  }
  return v.get<double>();
}

struct RawObject {
  int64_t frame_id;
  int class_id;
  det::Box box;
  std::optional<double> score;
};

inline std::vector<RawObject> ParseObjects(const json& doc, bool want_score) {
  if (!doc.is_object()) {
    throw Error(ErrorCode::kTypeMismatch, "top level must be an object");
  }
  RejectUnknownKeys(doc, {"frames", "info"}, "top level");
  const json& frames = Require(doc, "frames", "top level");
  if (!frames.is_array()) {
    throw Error(ErrorCode::kTypeMismatch, "\"frames\" must be an array");
  }
  std::vector<RawObject> out;
  for (size_t fi = 0; fi < frames.size(); ++fi) {
    const json& fr = frames[fi];
    const std::string fwhere = "frames[" + std::to_string(fi) + "]";
    if (!fr.is_object()) throw Error(ErrorCode::kTypeMismatch, fwhere + " must be an object");
    RejectUnknownKeys(fr, {"frame_id", "objects"}, fwhere);
    const int64_t frame_id = AsInt(Require(fr, "frame_id", fwhere), fwhere + ".frame_id");
    const json& objects = Require(fr, "objects", fwhere);
    if (!objects.is_array()) {
      throw Error(ErrorCode::kTypeMismatch, fwhere + ".objects must be an array");
    }
    for (size_t oi = 0; oi < objects.size(); ++oi) {
      const json& o = objects[oi];
      const std::string where = fwhere + ".objects[" + std::to_string(oi) + "]";
      if (!o.is_object()) throw Error(ErrorCode::kTypeMismatch, where + " must be an object");
      if (want_score) {
        RejectUnknownKeys(o, {"class_id", "bbox", "score"}, where);
      } else {
        RejectUnknownKeys(o, {"class_id", "bbox"}, where);
      }
      RawObject r{};
      r.frame_id = frame_id;
      r.class_id = static_cast<int>(AsInt(Require(o, "class_id", where), where + ".class_id"));
      const json& bbox = Require(o, "bbox", where);
      if (!bbox.is_array() || bbox.size() != 4) {
        throw Error(ErrorCode::kTypeMismatch, where + ".bbox must be [x, y, w, h]");
      }
      r.box = {AsReal(bbox[0], where + ".bbox"), AsReal(bbox[1], where + ".bbox"),
               AsReal(bbox[2], where + ".bbox"), AsReal(bbox[3], where + ".bbox")};
      if (!r.box.valid()) {
        throw Error(ErrorCode::kNonpositiveExtent, where + ": bbox w and h must be > 0");
      }
      if (want_score) {
        r.score = AsReal(Require(o, "score", where), where + ".score");
        if (!(*r.score >= 0.0 && *r.score <= 1.0)) {
          throw Error(ErrorCode::kConstraint, where + ": score must lie in [0,1]");
        }
      }
      out.push_back(r);
    }
  }
  return out;
}

}  // namespace detail

inline std::vector<det::GroundTruthBox> parse_annotations(const nlohmann::json& doc) {
  std::vector<det::GroundTruthBox> out;
  for (const auto& r : detail::ParseObjects(doc, false)) {
    out.push_back({r.frame_id, r.class_id, r.box});
  }
  return out;
}

inline std::vector<det::Detection> parse_detections(const nlohmann::json& doc) {
  std::vector<det::Detection> out;
  for (const auto& r : detail::ParseObjects(doc, true)) {
    out.push_back({r.frame_id, r.class_id, r.box, *r.score});
  }
  return out;
}

inline std::vector<det::GroundTruthBox> load_annotations(
    const std::filesystem::path& path) {
  try {
    return parse_annotations(detail::ParseJsonFile(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo || e.code() == ErrorCode::kMalformedJson) throw;
    throw Error(e.code(), path.string() + ": " + e.message());
  }
}

inline std::vector<det::Detection> load_detections(
    const std::filesystem::path& path) {
  try {
    return parse_detections(detail::ParseJsonFile(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo || e.code() == ErrorCode::kMalformedJson) throw;
    throw Error(e.code(), path.string() + ": " + e.message());
  }
}

// Writes detections (or, with scores dropped, annotations) in the shared
// schema, grouped by frame in ascending frame_id order.
inline nlohmann::json detections_to_json(const std::vector<det::Detection>& dets,
                                         bool with_score = true) {
  std::map<int64_t, nlohmann::json> frames;
  for (const auto& d : dets) {
    nlohmann::json o = {{"class_id", d.class_id},
                        {"bbox", {d.box.x, d.box.y, d.box.w, d.box.h}}};
    if (with_score) o["score"] = d.score;
    auto& f = frames[d.frame_id];
    if (f.is_null()) f = {{"frame_id", d.frame_id}, {"objects", nlohmann::json::array()}};
    f["objects"].push_back(std::move(o));
  }
  nlohmann::json doc = {{"frames", nlohmann::json::array()}};
  for (auto& [id, f] : frames) doc["frames"].push_back(std::move(f));
  return doc;
}

}  // namespace vcmc::dataio
