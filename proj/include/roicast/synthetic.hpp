#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "roicast/media_io.hpp"

namespace roicast {

/// Procedural QCIF harbour scene: sky, a static rocky shoreline, moving waves, a dark boat
/// drifting right and a bobbing buoy. The labels are the exact object boxes, so they play the
/// role of detector output.
struct SyntheticSequence {
  std::vector<LumaFrame> frames;
  RoiTable rois;
};

namespace detail {

// Stateless integer hash -> [0, 1). Identical on every platform.
inline double hash_unit(std::uint32_t x, std::uint32_t y, std::uint32_t z) {
  std::uint32_t h = x * 0x8DA6B343U ^ y * 0xD8163841U ^ z * 0xCB1AB31FU;
  h ^= h >> 15;
  h *= 0x2C1B3C6DU;
  h ^= h >> 12;
  h *= 0x297A2D39U;
  h ^= h >> 15;
  return static_cast<double>(h) / 4294967296.0;
}

inline double smooth_noise(double x, double y, std::uint32_t salt) {
  const int xi = static_cast<int>(std::floor(x));
  const int yi = static_cast<int>(std::floor(y));
  const double fx = x - xi;
  const double fy = y - yi;
  auto corner = [&](int dx, int dy) {
    return hash_unit(static_cast<std::uint32_t>(xi + dx), static_cast<std::uint32_t>(yi + dy), salt);
  };
  const double sx = fx * fx * (3 - 2 * fx);
  const double sy = fy * fy * (3 - 2 * fy);
  const double top = corner(0, 0) + sx * (corner(1, 0) - corner(0, 0));
  const double bottom = corner(0, 1) + sx * (corner(1, 1) - corner(0, 1));
  return top + sy * (bottom - top);
}

}  // namespace detail

inline SyntheticSequence make_harbour_sequence(int frame_count, int width = 176, int height = 144) {
  SyntheticSequence seq;
  const int horizon = height * 5 / 18;      // 40 for QCIF
  const int shore_end = height * 7 / 18;    // 56 for QCIF
  for (int t = 0; t < frame_count; ++t) {
    LumaFrame frame(width, height);
    const double boat_x = 18.0 + 0.5 * t;
    const int bx = static_cast<int>(std::floor(boat_x));
    const int by = height * 9 / 16;         // hull top, 81 for QCIF
    const int hull_w = 44;
    const int hull_h = 12;
    const int cabin_w = 16;
    const int cabin_h = 8;
    const int cabin_x = bx + 14;
    const int buoy_x = width * 3 / 4;
    const int buoy_y = height * 3 / 4 + static_cast<int>(std::lround(2.0 * std::sin(0.3 * t)));
    const int buoy_s = 10;

    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        double v;
        if (y < horizon) {
          v = 212.0 - 0.5 * y + 6.0 * detail::smooth_noise(x / 24.0 + 0.05 * t, y / 10.0, 7);
        } else if (y < shore_end) {
          v = 88.0 + 50.0 * detail::smooth_noise(x / 3.0, y / 3.0, 11) +
              20.0 * detail::smooth_noise(x / 7.0, y / 7.0, 13);
        } else {
          const double depth = static_cast<double>(y - shore_end) / (height - shore_end);
          v = 150.0 - 18.0 * depth + 9.0 * std::sin(0.42 * x + 0.8 * y - 0.25 * t) +
              5.0 * std::sin(0.17 * x - 0.37 * y + 0.11 * t);
        }
        // Boat: hull tapers toward the waterline, cabin on top.
        const int hy = y - by;
        if (hy >= 0 && hy < hull_h) {
          const int inset = hy / 3;
          if (x >= bx + inset && x < bx + hull_w - inset) {
            v = 46.0 + ((hy == 3 || hy == 4) ? 22.0 : 0.0) + 4.0 * ((x / 3) % 2);
          }
        }
        if (y >= by - cabin_h && y < by && x >= cabin_x && x < cabin_x + cabin_w) {
          v = 74.0 + (((x - cabin_x) % 5 < 2 && y > by - 6 && y < by - 2) ? 40.0 : 0.0);
        }
        const int qx = x - buoy_x;
        const int qy = y - buoy_y;
        if (qx >= 0 && qx < buoy_s && qy >= 0 && qy < buoy_s &&
            (qx - 4.5) * (qx - 4.5) + (qy - 4.5) * (qy - 4.5) <= 22.0) {
          v = qy < 4 ? 60.0 : 40.0;
        }
        v += 3.0 * (detail::hash_unit(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y),
                                      static_cast<std::uint32_t>(1000 + t)) - 0.5);
        frame.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
    seq.frames.push_back(std::move(frame));

    auto clip_rect = [&](int x0, int y0, int x1, int y1) {
      x0 = std::max(0, x0);
      y0 = std::max(0, y0);
      x1 = std::min(width, x1);
      y1 = std::min(height, y1);
      return RoiRect{t, x0, y0, x1 - x0, y1 - y0};
    };
    seq.rois[t].push_back(clip_rect(bx - 1, by - cabin_h - 1, bx + hull_w + 1, by + hull_h + 1));
    seq.rois[t].push_back(clip_rect(buoy_x - 1, buoy_y - 1, buoy_x + buoy_s + 1, buoy_y + buoy_s + 1));
  }
  return seq;
}

inline void write_roi_csv(std::ostream& out, const RoiTable& rois) {
  out << "# frame,x,y,w,h\n";
  for (const auto& [frame, rects] : rois) {
    for (const auto& r : rects) out << frame << ',' << r.x << ',' << r.y << ',' << r.w << ',' << r.h << '\n';
  }
}

}  // namespace roicast
