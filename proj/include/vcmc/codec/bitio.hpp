#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vcmc/error.hpp"

namespace vcmc::codec {

// MSB-first bit packer.
class BitWriter {
 public:
  void PutBit(bool bit) {
    if (used_ == 0) bytes_.push_back(0);
    if (bit) bytes_.back() |= static_cast<uint8_t>(0x80u >> used_);
    used_ = (used_ + 1) & 7;
  }

  void PutBits(uint64_t value, int count) {
    for (int i = count - 1; i >= 0; --i) PutBit(((value >> i) & 1u) != 0);
  }

  // Order-0 Exp-Golomb code of an unsigned value.
  void PutUe(uint64_t value) {
    const uint64_t v = value + 1;
    int len = 0;
    while ((v >> len) > 1) ++len;
    PutBits(0, len);
    PutBits(v, len + 1);
  }

  // Signed mapping 0, 1, -1, 2, -2, ... -> 0, 1, 2, 3, 4, ...
  void PutSe(int64_t value) {
    PutUe(value > 0 ? static_cast<uint64_t>(2 * value - 1)
                    : static_cast<uint64_t>(-2 * value));
  }

  // Remaining bits of the last byte stay zero.
  std::vector<uint8_t> Finish() && { return std::move(bytes_); }
  size_t bit_count() const {
    return bytes_.size() * 8 - (used_ == 0 ? 0 : 8 - used_);
  }

 private:
  std::vector<uint8_t> bytes_;
  int used_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const uint8_t> data) : data_(data) {}

  bool GetBit() {
    if (pos_ >= data_.size() * 8) {
      throw Error(ErrorCode::kTruncated, "payload ended mid-symbol");
    }
    const bool bit = (data_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1u;
    ++pos_;
    return bit;
  }

  uint64_t GetBits(int count) {
    uint64_t v = 0;
    for (int i = 0; i < count; ++i) v = (v << 1) | (GetBit() ? 1u : 0u);
    return v;
  }

  uint64_t GetUe() {
    int zeros = 0;
    while (!GetBit()) {
      if (++zeros > 32) {
        throw Error(ErrorCode::kCorruptPayload, "Exp-Golomb prefix too long");
      }
    }
    const uint64_t rest = GetBits(zeros);
    return ((uint64_t{1} << zeros) | rest) - 1;
  }

  int64_t GetSe() {
    const uint64_t k = GetUe();
    const int64_t mag = static_cast<int64_t>((k + 1) / 2);
    return (k & 1u) ? mag : -mag;
  }

  size_t bit_position() const { return pos_; }
  size_t bits_left() const { return data_.size() * 8 - pos_; }

 private:
  std::span<const uint8_t> data_;
  size_t pos_ = 0;
};

}  // namespace vcmc::codec
