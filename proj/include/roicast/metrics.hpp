#pragma once

#include <cmath>
#include <limits>
#include <optional>

#include "roicast/error.hpp"
#include "roicast/media_io.hpp"
#include "roicast/roi_coding.hpp"
#include "roicast/transform.hpp"

namespace roicast {

inline constexpr double kPeak = 255.0;
inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

enum class Region { All, Roi, NonRoi };

/// Mean squared pixel error, optionally restricted to ROI or non-ROI block footprints.
inline double mse(const LumaFrame& a, const LumaFrame& b, const RoiMask* mask = nullptr,
                  Region region = Region::All) {
  if (!a.same_geometry(b)) throw Error(ErrorKind::Validation, "frame geometries differ");
  const auto grid = BlockGrid::for_frame(a);
  if (mask != nullptr && mask->size() != static_cast<std::size_t>(grid.count())) {
    throw Error(ErrorKind::Validation, "mask does not match frame grid");
  }
  double acc = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      if (mask != nullptr && region != Region::All) {
        const bool roi = (*mask)[grid.index(y / kBlockSize, x / kBlockSize)];
        if (roi != (region == Region::Roi)) continue;
      }
      const double d = static_cast<double>(a.at(x, y)) - static_cast<double>(b.at(x, y));
      acc += d * d;
      ++count;
    }
  }
  if (count == 0) throw Error(ErrorKind::Validation, "region contains no pixels");
  return acc / static_cast<double>(count);
}

/// 20 log10(255 / sqrt(mse)); zero error yields +infinity.
inline double psnr(double mse_value) {
  if (mse_value < 0.0 || std::isnan(mse_value)) throw Error(ErrorKind::Domain, "negative MSE");
  if (mse_value == 0.0) return kInfinitePsnr;
  return 20.0 * std::log10(kPeak / std::sqrt(mse_value));
}

struct QualityReport {
  double mse_overall = 0.0;
  double psnr_overall = 0.0;
  std::optional<double> mse_roi;
  std::optional<double> psnr_roi;
  std::optional<double> mse_nonroi;
  std::optional<double> psnr_nonroi;
  std::size_t roi_pixels = 0;
  std::size_t nonroi_pixels = 0;
};

inline QualityReport quality_report(const LumaFrame& original, const LumaFrame& reconstructed,
                                    const RoiMask& mask) {
  QualityReport q;
  q.mse_overall = mse(original, reconstructed);
  q.psnr_overall = psnr(q.mse_overall);
  q.roi_pixels = mask.roi_pixels();
  q.nonroi_pixels = mask.nonroi_pixels();
  if (q.roi_pixels > 0) {
    q.mse_roi = mse(original, reconstructed, &mask, Region::Roi);
    q.psnr_roi = psnr(*q.mse_roi);
  }
  if (q.nonroi_pixels > 0) {
    q.mse_nonroi = mse(original, reconstructed, &mask, Region::NonRoi);
    q.psnr_nonroi = psnr(*q.mse_nonroi);
  }
  return q;
}

}  // namespace roicast
