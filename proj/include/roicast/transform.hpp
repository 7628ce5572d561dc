#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "roicast/error.hpp"
#include "roicast/media_io.hpp"

namespace roicast {

using BlockSamples = std::array<double, kBlockCoeffs>;  // row-major 8x8

/// Row-major block tiling of a frame.
struct BlockGrid {
  int width = 0;
  int height = 0;
  int blocks_x = 0;
  int blocks_y = 0;

  static BlockGrid for_geometry(int width, int height) {
    if (width <= 0 || height <= 0 || width % kBlockSize != 0 || height % kBlockSize != 0) {
      throw Error(ErrorKind::Validation, "geometry " + std::to_string(width) + "x" +
                                             std::to_string(height) + " is not block aligned");
    }
    return {width, height, width / kBlockSize, height / kBlockSize};
  }

  static BlockGrid for_frame(const LumaFrame& frame) {
    return for_geometry(frame.width(), frame.height());
  }

  int count() const noexcept { return blocks_x * blocks_y; }
  int index(int row, int col) const noexcept { return row * blocks_x + col; }
  int row(int index) const noexcept { return index / blocks_x; }
  int col(int index) const noexcept { return index % blocks_x; }

  friend bool operator==(const BlockGrid&, const BlockGrid&) = default;
};

/// One transmitted block: its coefficients plus the statistics that drive allocation.
struct DctBlock {
  int index = 0;
  BlockSamples coeffs{};
  double lambda = 0.0;
  double k = 0.0;
  double ell = 1.0;
  bool roi = false;
};

inline BlockSamples extract_block(const LumaFrame& frame, int row, int col) {
  BlockSamples out{};
  for (int y = 0; y < kBlockSize; ++y) {
    for (int x = 0; x < kBlockSize; ++x) {
      out[y * kBlockSize + x] = frame.at(col * kBlockSize + x, row * kBlockSize + y);
    }
  }
  return out;
}

struct PartitionedFrame {
  BlockGrid grid;
  std::vector<BlockSamples> blocks;
};

inline PartitionedFrame partition_blocks(const LumaFrame& frame) {
  PartitionedFrame out{BlockGrid::for_frame(frame), {}};
  out.blocks.reserve(static_cast<std::size_t>(out.grid.count()));
  for (int row = 0; row < out.grid.blocks_y; ++row) {
    for (int col = 0; col < out.grid.blocks_x; ++col) {
      out.blocks.push_back(extract_block(frame, row, col));
    }
  }
  return out;
}

/// Rounds half away from zero, then clamps into the 8-bit range.
inline std::uint8_t to_pixel(double value) {
  const double rounded = std::round(value);
  if (!(rounded > 0.0)) return 0;  // also catches NaN
  if (rounded >= 255.0) return 255;
  return static_cast<std::uint8_t>(rounded);
}

inline LumaFrame assemble_frame(const BlockGrid& grid, std::span<const BlockSamples> blocks) {
  if (blocks.size() != static_cast<std::size_t>(grid.count())) {
    throw Error(ErrorKind::Integrity, "expected " + std::to_string(grid.count()) + " blocks, got " +
                                          std::to_string(blocks.size()));
  }
  LumaFrame frame(grid.width, grid.height);
  for (int b = 0; b < grid.count(); ++b) {
    const int x0 = grid.col(b) * kBlockSize;
    const int y0 = grid.row(b) * kBlockSize;
    for (int y = 0; y < kBlockSize; ++y) {
      for (int x = 0; x < kBlockSize; ++x) {
        frame.at(x0 + x, y0 + y) = to_pixel(blocks[b][y * kBlockSize + x]);
      }
    }
  }
  return frame;
}

namespace detail {

// basis[k][n] = c(k) cos((2n+1) k pi / 16), orthonormal rows.
inline const std::array<std::array<double, kBlockSize>, kBlockSize>& dct_basis() {
  static const auto basis = [] {
    std::array<std::array<double, kBlockSize>, kBlockSize> b{};
    for (int k = 0; k < kBlockSize; ++k) {
      const double scale = k == 0 ? std::sqrt(1.0 / kBlockSize) : std::sqrt(2.0 / kBlockSize);
      for (int n = 0; n < kBlockSize; ++n) {
        b[k][n] = scale * std::cos((2 * n + 1) * k * std::numbers::pi / (2.0 * kBlockSize));
      }
    }
    return b;
  }();
  return basis;
}

}  // namespace detail

/// Orthonormal type-II 2D DCT, separable rows then columns. Output is row-major (v, u).
inline BlockSamples dct2_forward(const BlockSamples& block) {
  const auto& basis = detail::dct_basis();
  BlockSamples tmp{};
  for (int y = 0; y < kBlockSize; ++y) {
    for (int u = 0; u < kBlockSize; ++u) {
      double acc = 0.0;
      for (int x = 0; x < kBlockSize; ++x) acc += basis[u][x] * block[y * kBlockSize + x];
      tmp[y * kBlockSize + u] = acc;
    }
  }
  BlockSamples out{};
  for (int v = 0; v < kBlockSize; ++v) {
    for (int u = 0; u < kBlockSize; ++u) {
      double acc = 0.0;
      for (int y = 0; y < kBlockSize; ++y) acc += basis[v][y] * tmp[y * kBlockSize + u];
      out[v * kBlockSize + u] = acc;
    }
  }
  return out;
}

inline BlockSamples dct2_inverse(const BlockSamples& coeffs) {
  const auto& basis = detail::dct_basis();
  BlockSamples tmp{};
  for (int y = 0; y < kBlockSize; ++y) {
    for (int u = 0; u < kBlockSize; ++u) {
      double acc = 0.0;
      for (int v = 0; v < kBlockSize; ++v) acc += basis[v][y] * coeffs[v * kBlockSize + u];
      tmp[y * kBlockSize + u] = acc;
    }
  }
  BlockSamples out{};
  for (int y = 0; y < kBlockSize; ++y) {
    for (int x = 0; x < kBlockSize; ++x) {
      double acc = 0.0;
      for (int u = 0; u < kBlockSize; ++u) acc += basis[u][x] * tmp[y * kBlockSize + u];
      out[y * kBlockSize + x] = acc;
    }
  }
  return out;
}

/// Mean coefficient power (second moment, DC included).
inline double block_power(std::span<const double> coeffs) {
  if (coeffs.empty()) return 0.0;
  double acc = 0.0;
  for (double c : coeffs) acc += c * c;
  return acc / static_cast<double>(coeffs.size());
}

/// Blocks at or below this power carry nothing and are never transmitted.
inline constexpr double kPowerFloor = 1e-12;

}  // namespace roicast
