#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace vcmc::codec {

using Block8 = std::array<double, 64>;

// Orthonormal 8-point DCT-II basis: basis[u][x] = c(u) cos((2x+1) u pi / 16).
inline const std::array<std::array<double, 8>, 8>& DctBasis() {
  static const auto basis = [] {
    std::array<std::array<double, 8>, 8> m{};
    for (int u = 0; u < 8; ++u) {
      const double cu = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int x = 0; x < 8; ++x) {
        m[u][x] = cu * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
      }
    }
    return m;
  }();
  return basis;
}

// Row-major in and out; coefficient (u=row freq, v=col freq) at [u*8+v].
inline Block8 ForwardDct(const Block8& in) {
  const auto& c = DctBasis();
  Block8 tmp{}, out{};
  for (int y = 0; y < 8; ++y) {
    for (int v = 0; v < 8; ++v) {
      double acc = 0.0;
      for (int x = 0; x < 8; ++x) acc += c[v][x] * in[y * 8 + x];
      tmp[y * 8 + v] = acc;
    }
  }
  for (int u = 0; u < 8; ++u) {
    for (int v = 0; v < 8; ++v) {
      double acc = 0.0;
      for (int y = 0; y < 8; ++y) acc += c[u][y] * tmp[y * 8 + v];
      out[u * 8 + v] = acc;
    }
  }
  return out;
}

inline Block8 InverseDct(const Block8& in) {
  const auto& c = DctBasis();
  Block8 tmp{}, out{};
  for (int u = 0; u < 8; ++u) {
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int v = 0; v < 8; ++v) acc += c[v][x] * in[u * 8 + v];
      tmp[u * 8 + x] = acc;
    }
  }
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int u = 0; u < 8; ++u) acc += c[u][y] * tmp[u * 8 + x];
      out[y * 8 + x] = acc;
    }
  }
  return out;
}

// JPEG zigzag: position i in scan order -> raster index.
inline constexpr std::array<int, 64> kZigzag = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

}  // namespace vcmc::codec
