#pragma once

// Directories of 8-bit PNG frames, ordered by filename.

#include <png.h>

#include <algorithm>
#include <cstdio>
#include <cctype>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vcmc/error.hpp"
#include "vcmc/imagecore.hpp"

namespace vcmc::dataio {

namespace detail {

inline bool IsPng(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png";
}

inline Frame ReadPng(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw Error(ErrorCode::kIo, path.string() + ": " + image.message);
  }
  const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
  image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  const int w = static_cast<int>(image.width);
  const int h = static_cast<int>(image.height);
  const int channels = gray ? 1 : 3;
  std::vector<uint8_t> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kIo, path.string() + ": " + msg);
  }
  Frame frame(gray ? ColorFormat::kGray : ColorFormat::kRgb444, w, h);
  for (size_t i = 0; i < static_cast<size_t>(w) * h; ++i) {
    for (int c = 0; c < channels; ++c) {
      frame.plane(c).samples[i] = buf[i * channels + c];
    }
  }
  return frame;
}

inline void WritePng(const Frame& frame, const std::filesystem::path& path) {
  const bool gray = frame.format() == ColorFormat::kGray;
  const int channels = gray ? 1 : 3;
  const int w = frame.width(), h = frame.height();
  std::vector<uint8_t> buf(static_cast<size_t>(w) * h * channels);
  for (size_t i = 0; i < static_cast<size_t>(w) * h; ++i) {
    for (int c = 0; c < channels; ++c) {
      buf[i * channels + c] = frame.plane(c).samples[i];
    }
  }
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, buf.data(), 0,
                               nullptr)) {
    throw Error(ErrorCode::kIo, path.string() + ": " + image.message);
  }
}

}  // namespace detail

// Frames come back as RGB444, or GRAY when every file is grayscale.
inline VideoSequence read_image_dir(const std::filesystem::path& dir,
                                    double fps = 30.0,
                                    std::optional<int> frame_limit = {}) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kIo, dir.string() + " is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && detail::IsPng(entry.path())) {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) {
    throw Error(ErrorCode::kIo, dir.string() + " contains no PNG frames");
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) {
              return a.filename().string() < b.filename().string();
            });
  if (frame_limit) {
    if (*frame_limit < 1) throw Error(ErrorCode::kArgument, "frame_limit < 1");
    if (files.size() > static_cast<size_t>(*frame_limit)) {
      files.resize(static_cast<size_t>(*frame_limit));
    }
  }
  VideoSequence seq;
  seq.fps = fps;
  for (const auto& f : files) {
    Frame frame = detail::ReadPng(f);
    if (!seq.frames.empty() && !frame.SameLayout(seq.frames.front())) {
      throw Error(ErrorCode::kDimensionMismatch,
                  f.filename().string() + " differs in dims or color type");
    }
    seq.frames.push_back(std::move(frame));
  }
  seq.Validate();
  return seq;
}

// Writes frame_000000.png, frame_000001.png, ... ; YUV input is converted to
// RGB first.
inline void write_image_dir(const VideoSequence& seq,
                            const std::filesystem::path& dir) {
  seq.Validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string());
  for (size_t i = 0; i < seq.frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%06zu.png", i);
    const Frame& f = seq.frames[i];
    if (f.format() == ColorFormat::kGray || f.format() == ColorFormat::kRgb444) {
      detail::WritePng(f, dir / name);
    } else {
      detail::WritePng(to_rgb444(f), dir / name);
    }
  }
}

}  // namespace vcmc::dataio
