#pragma once

#include <algorithm>
#include <cmath>

#include "roicast/error.hpp"
#include "roicast/media_io.hpp"
#include "roicast/transform.hpp"

namespace roicast {

inline constexpr int kDefaultSearchRadius = 8;

struct MatchResult {
  int index = 0;
  int ref_y = 0;  // top-left pixel row of the matched window
  int ref_x = 0;
  double k = 0.0;
};

namespace detail {

// Mean-removed normalized cross-correlation. Constant inputs: 1 if identical, else 0.
inline double ncc(const BlockSamples& a, const BlockSamples& b) {
  double mean_a = 0.0;
  double mean_b = 0.0;
  for (int i = 0; i < kBlockCoeffs; ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= kBlockCoeffs;
  mean_b /= kBlockCoeffs;
  double cross = 0.0;
  double var_a = 0.0;
  double var_b = 0.0;
  for (int i = 0; i < kBlockCoeffs; ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cross += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) return a == b ? 1.0 : 0.0;
  return cross / std::sqrt(var_a * var_b);
}

inline BlockSamples window_at(const LumaFrame& frame, int y0, int x0) {
  BlockSamples out{};
  for (int y = 0; y < kBlockSize; ++y) {
    for (int x = 0; x < kBlockSize; ++x) out[y * kBlockSize + x] = frame.at(x0 + x, y0 + y);
  }
  return out;
}

}  // namespace detail

/// Full search of 8x8 windows within +-radius pixels of the co-located block, clipped to the frame.
/// Ties keep the lexicographically smallest (row, col) window.
inline MatchResult match_block(const BlockSamples& block, const LumaFrame& reference,
                               const BlockGrid& grid, int index,
                               int radius = kDefaultSearchRadius) {
  if (radius < 0) throw Error(ErrorKind::Domain, "search radius must be non-negative");
  if (reference.width() != grid.width || reference.height() != grid.height) {
    throw Error(ErrorKind::Validation, "reference geometry differs from transmitted frame");
  }
  const int cy = grid.row(index) * kBlockSize;
  const int cx = grid.col(index) * kBlockSize;
  const int y_lo = std::max(0, cy - radius);
  const int y_hi = std::min(reference.height() - kBlockSize, cy + radius);
  const int x_lo = std::max(0, cx - radius);
  const int x_hi = std::min(reference.width() - kBlockSize, cx + radius);

  MatchResult best{index, cy, cx, -2.0};
  for (int y = y_lo; y <= y_hi; ++y) {
    for (int x = x_lo; x <= x_hi; ++x) {
      const double score = detail::ncc(block, detail::window_at(reference, y, x));
      if (score > best.k) best = {index, y, x, score};
    }
  }
  best.k = std::clamp(best.k, 0.0, 1.0);
  return best;
}

/// Allocation weight of a block with correlation k among m coefficients: (k + sqrt((m-1)(1-k^2)))^2.
inline double corr_gain(double k, int m = kBlockCoeffs) {
  if (!(k >= 0.0 && k <= 1.0)) throw Error(ErrorKind::Domain, "correlation factor outside [0, 1]");
  if (m < 1) throw Error(ErrorKind::Domain, "block size must be positive");
  const double root = std::sqrt(static_cast<double>(m - 1) * (1.0 - k * k));
  return (k + root) * (k + root);
}

}  // namespace roicast
