#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "roicast/error.hpp"
#include "roicast/media_io.hpp"
#include "roicast/transform.hpp"

namespace roicast {

/// Inclusive run of ROI blocks in row-major block order.
struct RoiSpan {
  int start = 0;
  int end = 0;
  friend bool operator==(const RoiSpan&, const RoiSpan&) = default;
};

class RoiMask {
 public:
  RoiMask() = default;
  explicit RoiMask(std::size_t n_blocks, bool value = false) : flags_(n_blocks, value) {}
  explicit RoiMask(std::vector<bool> flags) : flags_(std::move(flags)) {}

  std::size_t size() const noexcept { return flags_.size(); }
  bool operator[](std::size_t i) const { return flags_[i]; }
  void set(std::size_t i, bool value = true) { flags_[i] = value; }

  std::size_t roi_blocks() const noexcept {
    std::size_t n = 0;
    for (bool f : flags_) n += f ? 1 : 0;
    return n;
  }
  std::size_t nonroi_blocks() const noexcept { return size() - roi_blocks(); }
  std::size_t roi_pixels() const noexcept { return roi_blocks() * kBlockCoeffs; }
  std::size_t nonroi_pixels() const noexcept { return nonroi_blocks() * kBlockCoeffs; }

  const std::vector<bool>& flags() const noexcept { return flags_; }

  friend bool operator==(const RoiMask&, const RoiMask&) = default;

 private:
  std::vector<bool> flags_;
};

/// A block is ROI when its footprint shares at least one pixel with any rect.
inline RoiMask classify_blocks(const BlockGrid& grid, std::span<const RoiRect> rects) {
  RoiMask mask(static_cast<std::size_t>(grid.count()));
  for (const auto& r : rects) {
    if (r.w <= 0 || r.h <= 0) continue;
    const int col_lo = r.x / kBlockSize;
    const int col_hi = std::min(grid.blocks_x - 1, (r.x + r.w - 1) / kBlockSize);
    const int row_lo = r.y / kBlockSize;
    const int row_hi = std::min(grid.blocks_y - 1, (r.y + r.h - 1) / kBlockSize);
    for (int row = row_lo; row <= row_hi; ++row) {
      for (int col = col_lo; col <= col_hi; ++col) mask.set(grid.index(row, col));
    }
  }
  return mask;
}

inline std::vector<RoiSpan> rlc_encode(const RoiMask& mask) {
  std::vector<RoiSpan> spans;
  const int n = static_cast<int>(mask.size());
  int i = 0;
  while (i < n) {
    if (!mask[i]) {
      ++i;
      continue;
    }
    const int start = i;
    while (i < n && mask[i]) ++i;
    spans.push_back({start, i - 1});
  }
  return spans;
}

/// Spans must be sorted, disjoint and inside [0, n_blocks).
inline RoiMask rlc_decode(std::span<const RoiSpan> spans, std::size_t n_blocks) {
  RoiMask mask(n_blocks);
  long previous_end = -1;
  for (const auto& s : spans) {
    if (s.start < 0 || s.start > s.end || static_cast<std::size_t>(s.end) >= n_blocks) {
      throw Error(ErrorKind::Validation, "span [" + std::to_string(s.start) + ", " +
                                             std::to_string(s.end) + "] outside block range");
    }
    if (s.start <= previous_end) {
      throw Error(ErrorKind::Validation, "spans overlap or are unsorted");
    }
    for (int i = s.start; i <= s.end; ++i) mask.set(static_cast<std::size_t>(i));
    previous_end = s.end;
  }
  return mask;
}

}  // namespace roicast
