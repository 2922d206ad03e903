#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "vcmc/error.hpp"

namespace vcmc::codec {

inline constexpr int kMinQp = 0;
inline constexpr int kMaxQp = 63;

inline void CheckQp(int qp) {
  if (qp < kMinQp || qp > kMaxQp) {
    throw Error(ErrorCode::kArgument,
                "qp must lie in [0,63], got " + std::to_string(qp));
  }
}

// Step size doubles every 6 QP; qp 4 is the unit step.
inline double qstep_from_qp(int qp) {
  CheckQp(qp);
  return std::exp2((qp - 4) / 6.0);
}

inline double measure_bitrate(uint64_t total_bytes, int64_t frames,
                              double fps) {
  if (frames < 1) throw Error(ErrorCode::kArgument, "frame count must be >= 1");
  if (!(fps > 0.0)) throw Error(ErrorCode::kArgument, "fps must be > 0");
  return static_cast<double>(total_bytes) * 8.0 * fps /
         static_cast<double>(frames) / 1000.0;
}

struct CodingStats {
  uint64_t total_bits = 0;
  int64_t frames = 0;
  double bitrate_kbps = 0.0;
};

inline CodingStats MakeStats(uint64_t total_bytes, int64_t frames,
                             double fps) {
  return {total_bytes * 8, frames, measure_bitrate(total_bytes, frames, fps)};
}

}  // namespace vcmc::codec
