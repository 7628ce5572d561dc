#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roicast/error.hpp"
#include "roicast/metrics.hpp"
#include "roicast/roi_coding.hpp"
#include "roicast/transform.hpp"

namespace roicast {

/// Noise variance seen by one real coefficient when sigma0_sq is the complex symbol variance.
inline constexpr double kRealNoiseShare = 0.5;

inline double effective_noise(double sigma0_sq) { return kRealNoiseShare * sigma0_sq; }

enum class Decoder { ZeroForcing, Llse };

inline Decoder parse_decoder(const std::string& name) {
  if (name == "zf") return Decoder::ZeroForcing;
  if (name == "llse") return Decoder::Llse;
  throw Error(ErrorKind::Parse, "unknown decoder \"" + name + "\"");
}

inline const char* to_string(Decoder d) { return d == Decoder::ZeroForcing ? "zf" : "llse"; }

inline std::vector<double> descale_zf(std::span<const double> r, double g) {
  if (!(g > 0.0)) throw Error(ErrorKind::Domain, "gain must be positive");
  std::vector<double> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = r[i] / g;
  return out;
}

/// Wiener estimate g lambda / (g^2 lambda + sigma^2) r.
inline std::vector<double> descale_llse(std::span<const double> r, double g, double lambda_hat,
                                        double sigma_eff_sq) {
  if (!(g > 0.0)) throw Error(ErrorKind::Domain, "gain must be positive");
  if (lambda_hat < 0.0) throw Error(ErrorKind::Domain, "prior power must be non-negative");
  std::vector<double> out(r.size(), 0.0);
  const double denom = g * g * lambda_hat + sigma_eff_sq;
  if (denom == 0.0) return out;
  const double w = g * lambda_hat / denom;
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = w * r[i];
  return out;
}

/// Expected squared error summed over one block's m coefficients under zero forcing.
inline double expected_distortion(double g, double sigma_eff_sq, int m = kBlockCoeffs) {
  if (!(g > 0.0)) throw Error(ErrorKind::Domain, "gain must be positive");
  return m * sigma_eff_sq / (g * g);
}

/// A block that is never sent loses its whole energy.
inline double skipped_distortion(double lambda_hat, int m = kBlockCoeffs) { return m * lambda_hat; }

struct DistortionReport {
  std::vector<double> per_block;
  double roi_sum = 0.0;
  double nonroi_sum = 0.0;
  double psnr_overall = 0.0;
  std::optional<double> psnr_roi;
  std::optional<double> psnr_nonroi;
};

/// Analytic frame quality: per-pixel MSE of a region is its summed block distortion over its
/// pixel count (orthonormal transform).
inline DistortionReport analytic_distortion(std::span<const double> gains, const std::vector<bool>& skipped,
                                            std::span<const double> lambda_hat, const RoiMask& mask,
                                            double sigma_eff_sq) {
  const std::size_t n = gains.size();
  if (skipped.size() != n || lambda_hat.size() != n || mask.size() != n) {
    throw Error(ErrorKind::Validation, "distortion inputs differ in length");
  }
  DistortionReport rep;
  rep.per_block.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool lost = skipped[i] || !(gains[i] > 0.0);
    rep.per_block[i] = lost ? skipped_distortion(lambda_hat[i])
                            : expected_distortion(gains[i], sigma_eff_sq);
    (mask[i] ? rep.roi_sum : rep.nonroi_sum) += rep.per_block[i];
  }
  const double total_px = static_cast<double>(n * kBlockCoeffs);
  rep.psnr_overall = psnr((rep.roi_sum + rep.nonroi_sum) / total_px);
  if (mask.roi_pixels() > 0) rep.psnr_roi = psnr(rep.roi_sum / static_cast<double>(mask.roi_pixels()));
  if (mask.nonroi_pixels() > 0) {
    rep.psnr_nonroi = psnr(rep.nonroi_sum / static_cast<double>(mask.nonroi_pixels()));
  }
  return rep;
}

struct ReceivedBlock {
  int index = 0;
  std::vector<double> coeffs;  // empty when skipped
  double gain = 0.0;
  double lambda_hat = 0.0;
  double k_hat = 0.0;
  bool roi = false;
  bool skipped = false;
};

/// Descales every block, inverts the DCT and reassembles with rounding and clamping.
/// Skipped blocks come back as zeros.
inline LumaFrame reconstruct_frame(std::span<const ReceivedBlock> blocks, const BlockGrid& grid,
                                   Decoder decoder = Decoder::ZeroForcing, double sigma_eff_sq = 0.0) {
  if (blocks.size() != static_cast<std::size_t>(grid.count())) {
    throw Error(ErrorKind::Integrity, "received " + std::to_string(blocks.size()) + " of " +
                                          std::to_string(grid.count()) + " blocks");
  }
  std::vector<BlockSamples> pixels(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    if (b.index != static_cast<int>(i)) throw Error(ErrorKind::Integrity, "blocks out of order");
    if (b.skipped) {
      pixels[i].fill(0.0);
      continue;
    }
    if (b.coeffs.size() != static_cast<std::size_t>(kBlockCoeffs)) {
      throw Error(ErrorKind::Integrity, "block " + std::to_string(i) + " is missing coefficients");
    }
    const auto est = decoder == Decoder::ZeroForcing
                         ? descale_zf(b.coeffs, b.gain)
                         : descale_llse(b.coeffs, b.gain, b.lambda_hat, sigma_eff_sq);
    BlockSamples coeffs{};
    std::copy(est.begin(), est.end(), coeffs.begin());
    pixels[i] = dct2_inverse(coeffs);
  }
  return assemble_frame(grid, pixels);
}

}  // namespace roicast
