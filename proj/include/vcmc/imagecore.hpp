#pragma once

// Pixel-level primitives: planar 8-bit frames, BT.601 color conversion,
// global-mean contrast reduction, Catmull-Rom bicubic resampling, histogram
// entropy and PSNR. Every function here is pure.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vcmc/error.hpp"

namespace vcmc {

enum class ColorFormat { kGray, kRgb444, kYuv444, kYuv420 };

inline const char* ColorFormatName(ColorFormat f) {
  switch (f) {
    case ColorFormat::kGray: return "GRAY";
    case ColorFormat::kRgb444: return "RGB444";
    case ColorFormat::kYuv444: return "YUV444";
    case ColorFormat::kYuv420: return "YUV420";
  }
  return "?";
}

// Rounds half away from zero and saturates to the 8-bit range.
inline uint8_t RoundToSample(double v) {
  const double r = std::round(v);
  if (!(r > 0.0)) return 0;  // also maps NaN to 0
  if (r >= 255.0) return 255;
  return static_cast<uint8_t>(r);
}

struct Plane {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> samples;  // row-major

  Plane() = default;
  Plane(int w, int h, uint8_t fill = 0) : width(w), height(h) {
    if (w < 1 || h < 1) {
      throw Error(ErrorCode::kArgument, "plane dims must be >= 1, got " +
                                            std::to_string(w) + "x" +
                                            std::to_string(h));
    }
    samples.assign(static_cast<size_t>(w) * static_cast<size_t>(h), fill);
  }

  uint8_t at(int x, int y) const {
    return samples[static_cast<size_t>(y) * width + x];
  }
  uint8_t& at(int x, int y) {
    return samples[static_cast<size_t>(y) * width + x];
  }
  std::span<const uint8_t> row(int y) const {
    return {samples.data() + static_cast<size_t>(y) * width,
            static_cast<size_t>(width)};
  }
  size_t size() const { return samples.size(); }

  friend bool operator==(const Plane&, const Plane&) = default;
};

class Frame {
 public:
  Frame() = default;

  // Allocates planes with the layout implied by `format`; for kYuv420 the
  // luma dims must be even.
  Frame(ColorFormat format, int width, int height, uint8_t fill = 0)
      : format_(format) {
    if (format == ColorFormat::kGray) {
      planes_.emplace_back(width, height, fill);
      return;
    }
    planes_.emplace_back(width, height, fill);
    if (format == ColorFormat::kYuv420) {
      if (width % 2 != 0 || height % 2 != 0) {
        throw Error(ErrorCode::kArgument,
                    "YUV420 luma dims must be even, got " +
                        std::to_string(width) + "x" + std::to_string(height));
      }
      planes_.emplace_back(width / 2, height / 2, fill);
      planes_.emplace_back(width / 2, height / 2, fill);
    } else {
      planes_.emplace_back(width, height, fill);
      planes_.emplace_back(width, height, fill);
    }
  }

  // Builds a frame from explicit planes, validating the layout.
  static Frame FromPlanes(ColorFormat format, std::vector<Plane> planes) {
    Frame f;
    f.format_ = format;
    f.planes_ = std::move(planes);
    f.Validate();
    return f;
  }

  void Validate() const {
    const size_t expected = format_ == ColorFormat::kGray ? 1 : 3;
    if (planes_.size() != expected) {
      throw Error(ErrorCode::kFormat,
                  std::string(ColorFormatName(format_)) + " needs " +
                      std::to_string(expected) + " planes, got " +
                      std::to_string(planes_.size()));
    }
    for (const Plane& p : planes_) {
      if (p.width < 1 || p.height < 1 ||
          p.samples.size() != static_cast<size_t>(p.width) * p.height) {
        throw Error(ErrorCode::kFormat, "plane sample count/dims mismatch");
      }
    }
    if (format_ == ColorFormat::kGray) return;
    const Plane& y = planes_[0];
    int cw = y.width, ch = y.height;
    if (format_ == ColorFormat::kYuv420) {
      if (y.width % 2 != 0 || y.height % 2 != 0) {
        throw Error(ErrorCode::kFormat, "YUV420 luma dims must be even");
      }
      cw /= 2;
      ch /= 2;
    }
    for (int i = 1; i < 3; ++i) {
      if (planes_[i].width != cw || planes_[i].height != ch) {
        throw Error(ErrorCode::kFormat,
                    std::string(ColorFormatName(format_)) +
                        ": plane " + std::to_string(i) + " has wrong dims");
      }
    }
  }

  ColorFormat format() const { return format_; }
  int width() const { return planes_.empty() ? 0 : planes_[0].width; }
  int height() const { return planes_.empty() ? 0 : planes_[0].height; }
  size_t plane_count() const { return planes_.size(); }
  const Plane& plane(size_t i) const { return planes_[i]; }
  Plane& plane(size_t i) { return planes_[i]; }
  const std::vector<Plane>& planes() const { return planes_; }

  size_t sample_count() const {
    size_t n = 0;
    for (const Plane& p : planes_) n += p.size();
    return n;
  }

  bool SameLayout(const Frame& other) const {
    if (format_ != other.format_ || planes_.size() != other.planes_.size()) {
      return false;
    }
    for (size_t i = 0; i < planes_.size(); ++i) {
      if (planes_[i].width != other.planes_[i].width ||
          planes_[i].height != other.planes_[i].height) {
        return false;
      }
    }
    return true;
  }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  ColorFormat format_ = ColorFormat::kGray;
  std::vector<Plane> planes_;
};

struct VideoSequence {
  std::vector<Frame> frames;
  double fps = 30.0;

  // Nonempty, fps > 0, and every frame shares the first frame's layout.
  void Validate() const {
    if (frames.empty()) throw Error(ErrorCode::kArgument, "empty sequence");
    if (!(fps > 0.0) || !std::isfinite(fps)) {
      throw Error(ErrorCode::kArgument, "fps must be > 0");
    }
    for (const Frame& f : frames) {
      f.Validate();
      if (!f.SameLayout(frames.front())) {
        throw Error(ErrorCode::kFormat, "sequence frames differ in layout");
      }
    }
  }

  int width() const { return frames.empty() ? 0 : frames.front().width(); }
  int height() const { return frames.empty() ? 0 : frames.front().height(); }
  ColorFormat format() const {
    return frames.empty() ? ColorFormat::kGray : frames.front().format();
  }

  friend bool operator==(const VideoSequence&, const VideoSequence&) = default;
};

struct ContrastParams {
  // Share of the tonal range pulled toward the frame mean.
  double alpha = 0.25;

  void Validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
      throw Error(ErrorCode::kArgument, "alpha must lie in [0,1]");
    }
  }
};

namespace detail {

inline void RequireThreeFullPlanes(const Frame& frame, const char* op) {
  if (frame.format() != ColorFormat::kRgb444 &&
      frame.format() != ColorFormat::kYuv444) {
    throw Error(ErrorCode::kFormat,
                std::string(op) + " needs RGB444 or YUV444 input, got " +
                    ColorFormatName(frame.format()));
  }
}

// Catmull-Rom cubic (a = -0.5).
inline double CubicWeight(double x) {
  constexpr double a = -0.5;
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

struct AxisTaps {
  std::vector<std::array<int, 4>> index;
  std::vector<std::array<double, 4>> weight;
};

inline AxisTaps ComputeTaps(int in_size, int out_size) {
  AxisTaps taps;
  taps.index.resize(out_size);
  taps.weight.resize(out_size);
  const double ratio = static_cast<double>(in_size) / out_size;
  for (int d = 0; d < out_size; ++d) {
    const double src = (d + 0.5) * ratio - 0.5;
    const double base = std::floor(src);
    const double t = src - base;
    const int i0 = static_cast<int>(base);
    for (int k = 0; k < 4; ++k) {
      taps.index[d][k] = std::clamp(i0 - 1 + k, 0, in_size - 1);
      taps.weight[d][k] = CubicWeight(t - (k - 1));
    }
  }
  return taps;
}

inline Plane ResizePlane(const Plane& in, int out_w, int out_h) {
  const AxisTaps hx = ComputeTaps(in.width, out_w);
  const AxisTaps vy = ComputeTaps(in.height, out_h);
  // Horizontal pass kept in full precision; one rounding at the end.
  std::vector<double> tmp(static_cast<size_t>(out_w) * in.height);
  for (int y = 0; y < in.height; ++y) {
    const auto src = in.row(y);
    double* dst = tmp.data() + static_cast<size_t>(y) * out_w;
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += hx.weight[x][k] * src[hx.index[x][k]];
      dst[x] = acc;
    }
  }
  Plane out(out_w, out_h);
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) {
        acc += vy.weight[y][k] *
               tmp[static_cast<size_t>(vy.index[y][k]) * out_w + x];
      }
      out.at(x, y) = RoundToSample(acc);
    }
  }
  return out;
}

constexpr double kKr = 0.299;
constexpr double kKg = 0.587;
constexpr double kKb = 0.114;
constexpr double kCbScale = 0.564;
constexpr double kCrScale = 0.713;

struct Yuv {
  double y, cb, cr;
};
struct Rgb {
  double r, g, b;
};

inline Yuv RgbToYuv(double r, double g, double b) {
  const double y = kKr * r + kKg * g + kKb * b;
  return {y, 128.0 + (b - y) * kCbScale, 128.0 + (r - y) * kCrScale};
}

// Exact inverse of RgbToYuv (before rounding).
inline Rgb YuvToRgb(double y, double cb, double cr) {
  const double r = y + (cr - 128.0) / kCrScale;
  const double b = y + (cb - 128.0) / kCbScale;
  const double g = (y - kKr * r - kKb * b) / kKg;
  return {r, g, b};
}

}  // namespace detail

// Mean over all samples of the three equal-size planes, i.e. the sum divided
// by 3*X*Y. The sum is accumulated exactly.
inline double global_mean(const Frame& frame) {
  detail::RequireThreeFullPlanes(frame, "global_mean");
  uint64_t sum = 0;
  for (const Plane& p : frame.planes()) {
    for (uint8_t v : p.samples) sum += v;
  }
  return static_cast<double>(sum) / static_cast<double>(frame.sample_count());
}

// Per-sample blend toward the frame mean:
//   out = clamp(round((1 - alpha) * v + alpha * mean), 0, 255).
// Implemented as a 256-entry map so equal inputs always give equal outputs.
inline Frame contrast_reduce(const Frame& frame, const ContrastParams& params) {
  params.Validate();
  const double mean = global_mean(frame);
  std::array<uint8_t, 256> lut{};
  const double keep = 1.0 - params.alpha;
  const double offset = params.alpha * mean;
  for (int v = 0; v < 256; ++v) lut[v] = RoundToSample(keep * v + offset);
  Frame out = frame;
  for (size_t i = 0; i < out.plane_count(); ++i) {
    for (uint8_t& s : out.plane(i).samples) s = lut[s];
  }
  return out;
}

inline Frame bicubic_resize(const Frame& frame, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) {
    throw Error(ErrorCode::kArgument, "resize target dims must be >= 1, got " +
                                          std::to_string(out_w) + "x" +
                                          std::to_string(out_h));
  }
  if (frame.format() == ColorFormat::kYuv420) {
    throw Error(ErrorCode::kFormat,
                "bicubic_resize does not take YUV420; resize planes "
                "individually");
  }
  std::vector<Plane> planes;
  planes.reserve(frame.plane_count());
  for (const Plane& p : frame.planes()) {
    if (p.width == out_w && p.height == out_h) {
      planes.push_back(p);
    } else {
      planes.push_back(detail::ResizePlane(p, out_w, out_h));
    }
  }
  return Frame::FromPlanes(frame.format(), std::move(planes));
}

// Single-plane variant, used for 4:2:0 data.
inline Plane bicubic_resize(const Plane& plane, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) {
    throw Error(ErrorCode::kArgument, "resize target dims must be >= 1");
  }
  if (plane.width == out_w && plane.height == out_h) return plane;
  return detail::ResizePlane(plane, out_w, out_h);
}

// Entropy in bits/sample of the 256-bin histogram pooled over all planes.
inline double shannon_entropy(const Frame& frame) {
  std::array<uint64_t, 256> hist{};
  for (const Plane& p : frame.planes()) {
    for (uint8_t v : p.samples) ++hist[v];
  }
  const double n = static_cast<double>(frame.sample_count());
  if (n == 0.0) return 0.0;
  double h = 0.0;
  for (uint64_t c : hist) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

inline double mean_squared_error(const Frame& a, const Frame& b) {
  if (!a.SameLayout(b)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "frames differ in dims or color format");
  }
  uint64_t sse = 0;
  for (size_t i = 0; i < a.plane_count(); ++i) {
    const auto& sa = a.plane(i).samples;
    const auto& sb = b.plane(i).samples;
    for (size_t k = 0; k < sa.size(); ++k) {
      const int d = static_cast<int>(sa[k]) - static_cast<int>(sb[k]);
      sse += static_cast<uint64_t>(d * d);
    }
  }
  return static_cast<double>(sse) / static_cast<double>(a.sample_count());
}

// 10*log10(255^2 / MSE); +infinity for identical frames.
inline double psnr(const Frame& a, const Frame& b) {
  const double mse = mean_squared_error(a, b);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

// Sequence PSNR from the pooled MSE of all frames.
inline double psnr(const VideoSequence& a, const VideoSequence& b) {
  if (a.frames.size() != b.frames.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "frame counts differ");
  }
  double mse_sum = 0.0;
  double weight = 0.0;
  for (size_t i = 0; i < a.frames.size(); ++i) {
    const double n = static_cast<double>(a.frames[i].sample_count());
    mse_sum += mean_squared_error(a.frames[i], b.frames[i]) * n;
    weight += n;
  }
  if (mse_sum == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / (mse_sum / weight));
}

// BT.601 full range; chroma is the rounded mean of each 2x2 block of
// full-resolution Cb/Cr values.
inline Frame rgb_to_yuv420(const Frame& frame) {
  if (frame.format() != ColorFormat::kRgb444) {
    throw Error(ErrorCode::kFormat, std::string("rgb_to_yuv420 needs RGB444, got ") +
                                        ColorFormatName(frame.format()));
  }
  const int w = frame.width(), h = frame.height();
  if (w % 2 != 0 || h % 2 != 0) {
    throw Error(ErrorCode::kArgument, "4:2:0 conversion needs even dims, got " +
                                          std::to_string(w) + "x" +
                                          std::to_string(h));
  }
  const Plane& r = frame.plane(0);
  const Plane& g = frame.plane(1);
  const Plane& b = frame.plane(2);
  Frame out(ColorFormat::kYuv420, w, h);
  std::vector<double> cb(static_cast<size_t>(w) * h);
  std::vector<double> cr(cb.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const detail::Yuv c = detail::RgbToYuv(r.at(x, y), g.at(x, y), b.at(x, y));
      out.plane(0).at(x, y) = RoundToSample(c.y);
      cb[static_cast<size_t>(y) * w + x] = c.cb;
      cr[static_cast<size_t>(y) * w + x] = c.cr;
    }
  }
  for (int y = 0; y < h / 2; ++y) {
    for (int x = 0; x < w / 2; ++x) {
      const size_t i00 = static_cast<size_t>(2 * y) * w + 2 * x;
      const size_t i10 = i00 + w;
      out.plane(1).at(x, y) =
          RoundToSample((cb[i00] + cb[i00 + 1] + cb[i10] + cb[i10 + 1]) / 4.0);
      out.plane(2).at(x, y) =
          RoundToSample((cr[i00] + cr[i00 + 1] + cr[i10] + cr[i10 + 1]) / 4.0);
    }
  }
  return out;
}

// Nearest-neighbour chroma upsampling followed by the inverse BT.601 matrix.
inline Frame yuv420_to_rgb(const Frame& frame) {
  if (frame.format() != ColorFormat::kYuv420) {
    throw Error(ErrorCode::kFormat, std::string("yuv420_to_rgb needs YUV420, got ") +
                                        ColorFormatName(frame.format()));
  }
  frame.Validate();
  const int w = frame.width(), h = frame.height();
  Frame out(ColorFormat::kRgb444, w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const detail::Rgb c = detail::YuvToRgb(frame.plane(0).at(x, y),
                                             frame.plane(1).at(x / 2, y / 2),
                                             frame.plane(2).at(x / 2, y / 2));
      out.plane(0).at(x, y) = RoundToSample(c.r);
      out.plane(1).at(x, y) = RoundToSample(c.g);
      out.plane(2).at(x, y) = RoundToSample(c.b);
    }
  }
  return out;
}

// Brings any supported frame into full-resolution RGB.
inline Frame to_rgb444(const Frame& frame) {
  switch (frame.format()) {
    case ColorFormat::kRgb444:
      return frame;
    case ColorFormat::kYuv420:
      return yuv420_to_rgb(frame);
    case ColorFormat::kGray: {
      const Plane& p = frame.plane(0);
      return Frame::FromPlanes(ColorFormat::kRgb444, {p, p, p});
    }
    case ColorFormat::kYuv444: {
      Frame out(ColorFormat::kRgb444, frame.width(), frame.height());
      for (size_t i = 0; i < frame.plane(0).size(); ++i) {
        const detail::Rgb c = detail::YuvToRgb(frame.plane(0).samples[i],
                                               frame.plane(1).samples[i],
                                               frame.plane(2).samples[i]);
        out.plane(0).samples[i] = RoundToSample(c.r);
        out.plane(1).samples[i] = RoundToSample(c.g);
        out.plane(2).samples[i] = RoundToSample(c.b);
      }
      return out;
    }
  }
  throw Error(ErrorCode::kFormat, "unsupported color format");
}

}  // namespace vcmc
