#pragma once

// Built-in intra codec ("TIC1"). Each frame and plane is padded to a multiple
// of 8 by edge replication and split into 8x8 blocks. A block is level-shifted
// by -128, transformed with the orthonormal DCT-II, quantized with
// round(coef / qstep) and scanned in zigzag order.
//
// Stream layout (all integers big-endian):
//   "TIC1" | version u8 | luma_w u32 | luma_h u32 | frames u32 |
//   plane_count u8 | plane_count x (w u32, h u32) | qp u8 | payload
//
// Payload, MSB-first, for every frame / plane / block in raster order:
//   0                          all levels zero
//   1 last:u6 se(l0)..se(last) levels up to the last nonzero one
// The final byte is zero padded.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "vcmc/codec/bitio.hpp"
#include "vcmc/codec/common.hpp"
#include "vcmc/codec/dct.hpp"
#include "vcmc/error.hpp"
#include "vcmc/imagecore.hpp"

namespace vcmc::codec {

inline constexpr std::array<uint8_t, 4> kMagic = {'T', 'I', 'C', '1'};
inline constexpr uint8_t kBitstreamVersion = 1;

struct PlaneDims {
  uint32_t width = 0;
  uint32_t height = 0;
  friend bool operator==(const PlaneDims&, const PlaneDims&) = default;
};

struct BitstreamHeader {
  uint8_t version = kBitstreamVersion;
  uint32_t luma_width = 0;
  uint32_t luma_height = 0;
  uint32_t frame_count = 0;
  std::vector<PlaneDims> planes;
  uint8_t qp = 0;

  size_t byte_size() const { return 4 + 1 + 12 + 1 + 8 * planes.size() + 1; }
  friend bool operator==(const BitstreamHeader&,
                         const BitstreamHeader&) = default;
};

struct Bitstream {
  BitstreamHeader header;
  std::vector<uint8_t> bytes;  // whole stream, header included
};

namespace detail {

inline void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v >> 24));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

class ByteCursor {
 public:
  explicit ByteCursor(std::span<const uint8_t> data) : data_(data) {}
  uint8_t U8() {
    Need(1);
    return data_[pos_++];
  }
  uint32_t U32() {
    Need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_++];
    return v;
  }
  size_t pos() const { return pos_; }

 private:
  void Need(size_t n) const {
    if (pos_ + n > data_.size()) {
      throw Error(ErrorCode::kTruncated, "stream ends inside the header");
    }
  }
  std::span<const uint8_t> data_;
  size_t pos_ = 0;
};

inline size_t BlockCount(const PlaneDims& d) {
  return static_cast<size_t>((d.width + 7) / 8) * ((d.height + 7) / 8);
}

inline void EncodePlane(const Plane& plane, double qstep, BitWriter& bw) {
  const int bw_blocks = (plane.width + 7) / 8;
  const int bh_blocks = (plane.height + 7) / 8;
  Block8 block{};
  for (int by = 0; by < bh_blocks; ++by) {
    for (int bx = 0; bx < bw_blocks; ++bx) {
      for (int y = 0; y < 8; ++y) {
        const int sy = std::min(by * 8 + y, plane.height - 1);
        for (int x = 0; x < 8; ++x) {
          const int sx = std::min(bx * 8 + x, plane.width - 1);
          block[y * 8 + x] = static_cast<double>(plane.at(sx, sy)) - 128.0;
        }
      }
      const Block8 coef = ForwardDct(block);
      std::array<int64_t, 64> levels{};
      int last = -1;
      for (int i = 0; i < 64; ++i) {
        levels[i] = static_cast<int64_t>(std::round(coef[kZigzag[i]] / qstep));
        if (levels[i] != 0) last = i;
      }
      if (last < 0) {
        bw.PutBit(false);
        continue;
      }
      bw.PutBit(true);
      bw.PutBits(static_cast<uint64_t>(last), 6);
      for (int i = 0; i <= last; ++i) bw.PutSe(levels[i]);
    }
  }
}

inline Plane DecodePlane(const PlaneDims& dims, double qstep, BitReader& br) {
  Plane plane(static_cast<int>(dims.width), static_cast<int>(dims.height));
  const int bw_blocks = (plane.width + 7) / 8;
  const int bh_blocks = (plane.height + 7) / 8;
  for (int by = 0; by < bh_blocks; ++by) {
    for (int bx = 0; bx < bw_blocks; ++bx) {
      Block8 coef{};
      if (br.GetBit()) {
        const int last = static_cast<int>(br.GetBits(6));
        for (int i = 0; i <= last; ++i) {
          coef[kZigzag[i]] = static_cast<double>(br.GetSe()) * qstep;
        }
      }
      const Block8 pix = InverseDct(coef);
      for (int y = 0; y < 8; ++y) {
        const int py = by * 8 + y;
        if (py >= plane.height) break;
        for (int x = 0; x < 8; ++x) {
          const int px = bx * 8 + x;
          if (px >= plane.width) break;
          plane.at(px, py) = RoundToSample(pix[y * 8 + x] + 128.0);
        }
      }
    }
  }
  return plane;
}

inline void ValidateHeader(const BitstreamHeader& h) {
  if (h.version != kBitstreamVersion) {
    throw Error(ErrorCode::kCorruptPayload,
                "unsupported version " + std::to_string(h.version));
  }
  if (h.qp > kMaxQp) {
    throw Error(ErrorCode::kCorruptPayload, "qp out of range in header");
  }
  if (h.frame_count == 0 || h.luma_width == 0 || h.luma_height == 0) {
    throw Error(ErrorCode::kCorruptPayload, "zero dims or frame count");
  }
  if (h.luma_width > (1u << 16) || h.luma_height > (1u << 16)) {
    throw Error(ErrorCode::kCorruptPayload, "luma dims exceed 65536");
  }
  const PlaneDims luma{h.luma_width, h.luma_height};
  if (h.planes.size() == 1) {
    if (h.planes[0] != luma) {
      throw Error(ErrorCode::kCorruptPayload, "plane 0 dims differ from luma");
    }
    return;
  }
  if (h.planes.size() != 3 || h.planes[0] != luma || h.luma_width % 2 != 0 ||
      h.luma_height % 2 != 0) {
    throw Error(ErrorCode::kCorruptPayload, "plane layout is not 4:2:0");
  }
  const PlaneDims chroma{h.luma_width / 2, h.luma_height / 2};
  if (h.planes[1] != chroma || h.planes[2] != chroma) {
    throw Error(ErrorCode::kCorruptPayload, "chroma dims are not half luma");
  }
}

}  // namespace detail

inline std::vector<uint8_t> SerializeHeader(const BitstreamHeader& h) {
  std::vector<uint8_t> out(kMagic.begin(), kMagic.end());
  out.push_back(h.version);
  detail::PutU32(out, h.luma_width);
  detail::PutU32(out, h.luma_height);
  detail::PutU32(out, h.frame_count);
  out.push_back(static_cast<uint8_t>(h.planes.size()));
  for (const PlaneDims& p : h.planes) {
    detail::PutU32(out, p.width);
    detail::PutU32(out, p.height);
  }
  out.push_back(h.qp);
  return out;
}

// Parses and validates the header only.
inline BitstreamHeader ParseHeader(std::span<const uint8_t> bytes) {
  if (bytes.size() < kMagic.size()) {
    if (!std::equal(bytes.begin(), bytes.end(), kMagic.begin())) {
      throw Error(ErrorCode::kBadMagic, "stream does not start with TIC1");
    }
    throw Error(ErrorCode::kTruncated, "stream ends inside the magic");
  }
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw Error(ErrorCode::kBadMagic, "stream does not start with TIC1");
  }
  detail::ByteCursor cur(bytes.subspan(kMagic.size()));
  BitstreamHeader h;
  h.version = cur.U8();
  h.luma_width = cur.U32();
  h.luma_height = cur.U32();
  h.frame_count = cur.U32();
  const uint8_t plane_count = cur.U8();
  if (plane_count != 1 && plane_count != 3) {
    throw Error(ErrorCode::kCorruptPayload,
                "plane count must be 1 or 3, got " + std::to_string(plane_count));
  }
  for (int i = 0; i < plane_count; ++i) {
    PlaneDims d;
    d.width = cur.U32();
    d.height = cur.U32();
    h.planes.push_back(d);
  }
  h.qp = cur.U8();
  detail::ValidateHeader(h);
  return h;
}

inline Bitstream ParseBitstream(std::vector<uint8_t> bytes) {
  Bitstream bs;
  bs.header = ParseHeader(bytes);
  bs.bytes = std::move(bytes);
  return bs;
}

// Input must be YUV420 (or GRAY) frames.
inline Bitstream encode_builtin(const VideoSequence& seq, int qp) {
  CheckQp(qp);
  seq.Validate();
  const ColorFormat fmt = seq.format();
  if (fmt != ColorFormat::kYuv420 && fmt != ColorFormat::kGray) {
    throw Error(ErrorCode::kFormat,
                std::string("built-in codec takes YUV420 or GRAY, got ") +
                    ColorFormatName(fmt));
  }
  BitstreamHeader h;
  h.luma_width = static_cast<uint32_t>(seq.width());
  h.luma_height = static_cast<uint32_t>(seq.height());
  h.frame_count = static_cast<uint32_t>(seq.frames.size());
  for (const Plane& p : seq.frames.front().planes()) {
    h.planes.push_back({static_cast<uint32_t>(p.width),
                        static_cast<uint32_t>(p.height)});
  }
  h.qp = static_cast<uint8_t>(qp);
  detail::ValidateHeader(h);

  const double qstep = qstep_from_qp(qp);
  BitWriter bw;
  for (const Frame& f : seq.frames) {
    for (const Plane& p : f.planes()) detail::EncodePlane(p, qstep, bw);
  }
  Bitstream bs;
  bs.header = h;
  bs.bytes = SerializeHeader(h);
  const std::vector<uint8_t> payload = std::move(bw).Finish();
  bs.bytes.insert(bs.bytes.end(), payload.begin(), payload.end());
  return bs;
}

// Decodes a complete stream. `fps` is carried into the result only; the
// stream itself does not store it.
inline VideoSequence decode_builtin(std::span<const uint8_t> bytes,
                                    double fps = 30.0) {
  const BitstreamHeader h = ParseHeader(bytes);
  const std::span<const uint8_t> payload = bytes.subspan(h.byte_size());
  // Every block costs at least one bit; reject impossible sizes before
  // allocating anything.
  size_t min_bits = 0;
  for (const PlaneDims& p : h.planes) min_bits += detail::BlockCount(p);
  min_bits *= h.frame_count;
  if (payload.size() * 8 < min_bits) {
    throw Error(ErrorCode::kTruncated, "payload shorter than block count");
  }

  const double qstep = qstep_from_qp(h.qp);
  const ColorFormat fmt =
      h.planes.size() == 1 ? ColorFormat::kGray : ColorFormat::kYuv420;
  BitReader br(payload);
  VideoSequence seq;
  seq.fps = fps;
  seq.frames.reserve(h.frame_count);
  for (uint32_t f = 0; f < h.frame_count; ++f) {
    std::vector<Plane> planes;
    for (const PlaneDims& d : h.planes) {
      planes.push_back(detail::DecodePlane(d, qstep, br));
    }
    seq.frames.push_back(Frame::FromPlanes(fmt, std::move(planes)));
  }
  const size_t used_bytes = (br.bit_position() + 7) / 8;
  if (used_bytes < payload.size()) {
    throw Error(ErrorCode::kTrailingData,
                std::to_string(payload.size() - used_bytes) +
                    " bytes after the last block");
  }
  while (br.bits_left() > 0) {
    if (br.GetBit()) {
      throw Error(ErrorCode::kCorruptPayload, "nonzero padding bits");
    }
  }
  return seq;
}

inline VideoSequence decode_builtin(const Bitstream& bs, double fps = 30.0) {
  return decode_builtin(std::span<const uint8_t>(bs.bytes), fps);
}

}  // namespace vcmc::codec
