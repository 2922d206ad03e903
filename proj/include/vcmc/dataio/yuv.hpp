#pragma once

// Raw planar I420 files: per frame the full Y plane, then quarter-size U and V.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "vcmc/error.hpp"
#include "vcmc/imagecore.hpp"

namespace vcmc::dataio {

inline size_t Yuv420FrameBytes(int width, int height) {
  return static_cast<size_t>(width) * height * 3 / 2;
}

inline VideoSequence read_yuv420(const std::filesystem::path& path, int width,
                                 int height, double fps,
                                 std::optional<int> frame_limit = {}) {
  if (width < 2 || height < 2 || width % 2 != 0 || height % 2 != 0) {
    throw Error(ErrorCode::kArgument, "YUV420 needs even dims >= 2, got " +
                                          std::to_string(width) + "x" +
                                          std::to_string(height));
  }
  if (!(fps > 0.0)) throw Error(ErrorCode::kArgument, "fps must be > 0");
  std::error_code ec;
  const auto file_size = std::filesystem::file_size(path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot stat " + path.string());
  const size_t frame_bytes = Yuv420FrameBytes(width, height);
  if (file_size == 0 || file_size % frame_bytes != 0) {
    throw Error(ErrorCode::kSizeMismatch,
                path.string() + ": " + std::to_string(file_size) +
                    " bytes is not a positive multiple of the " +
                    std::to_string(frame_bytes) + "-byte frame size");
  }
  size_t count = file_size / frame_bytes;
  if (frame_limit) {
    if (*frame_limit < 1) throw Error(ErrorCode::kArgument, "frame_limit < 1");
    count = std::min(count, static_cast<size_t>(*frame_limit));
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  VideoSequence seq;
  seq.fps = fps;
  seq.frames.reserve(count);
  for (size_t f = 0; f < count; ++f) {
    Frame frame(ColorFormat::kYuv420, width, height);
    for (size_t p = 0; p < 3; ++p) {
      auto& s = frame.plane(p).samples;
      in.read(reinterpret_cast<char*>(s.data()),
              static_cast<std::streamsize>(s.size()));
    }
    if (!in) throw Error(ErrorCode::kIo, "short read from " + path.string());
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

inline void write_yuv420(const VideoSequence& seq,
                         const std::filesystem::path& path) {
  seq.Validate();
  if (seq.format() != ColorFormat::kYuv420) {
    throw Error(ErrorCode::kFormat, std::string("write_yuv420 needs YUV420, got ") +
                                        ColorFormatName(seq.format()));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot create " + path.string());
  for (const Frame& f : seq.frames) {
    for (const Plane& p : f.planes()) {
      out.write(reinterpret_cast<const char*>(p.samples.data()),
                static_cast<std::streamsize>(p.samples.size()));
    }
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace vcmc::dataio
