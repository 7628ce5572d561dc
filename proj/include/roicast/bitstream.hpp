#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "roicast/error.hpp"

namespace roicast {

/// MSB-first bit packer.
class BitWriter {
 public:
  void put(std::uint64_t value, int bits) {
    for (int i = bits - 1; i >= 0; --i) put_bit(((value >> i) & 1U) != 0);
  }

  void put_bit(bool bit) {
    if (bit_count_ % 8 == 0) bytes_.push_back(0);
    if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80U >> (bit_count_ % 8));
    ++bit_count_;
  }

  std::size_t bit_count() const noexcept { return bit_count_; }
  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t bit_count_ = 0;
};

class BitReader {
 public:
  BitReader(std::span<const std::uint8_t> bytes, std::size_t bit_count)
      : bytes_(bytes), bit_count_(bit_count) {
    if (bit_count > bytes.size() * 8) {
      throw Error(ErrorKind::CorruptStream, "bit count exceeds buffer");
    }
  }
  explicit BitReader(std::span<const std::uint8_t> bytes) : BitReader(bytes, bytes.size() * 8) {}

  bool get_bit() {
    if (pos_ >= bit_count_) throw Error(ErrorKind::CorruptStream, "read past end of bitstream");
    const bool bit = (bytes_[pos_ / 8] & (0x80U >> (pos_ % 8))) != 0;
    ++pos_;
    return bit;
  }

  std::uint64_t get(int bits) {
    std::uint64_t value = 0;
    for (int i = 0; i < bits; ++i) value = (value << 1) | (get_bit() ? 1U : 0U);
    return value;
  }

  std::size_t position() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bit_count_ - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t bit_count_;
  std::size_t pos_ = 0;
};

}  // namespace roicast
