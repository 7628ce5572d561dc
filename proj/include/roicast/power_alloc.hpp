#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "roicast/error.hpp"
#include "roicast/media_io.hpp"
#include "roicast/roi_coding.hpp"
#include "roicast/transform.hpp"

namespace roicast {

enum class Scheme { SoftCast, KmvCast, RoicCast, Equal };

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::SoftCast: return "softcast";
    case Scheme::KmvCast: return "kmvcast";
    case Scheme::RoicCast: return "roiccast";
    case Scheme::Equal: return "equal";
  }
  return "?";
}

inline Scheme parse_scheme(const std::string& name) {
  if (name == "softcast") return Scheme::SoftCast;
  if (name == "kmvcast") return Scheme::KmvCast;
  if (name == "roiccast") return Scheme::RoicCast;
  if (name == "equal") return Scheme::Equal;
  throw Error(ErrorKind::Parse, "unknown scheme \"" + name + "\"");
}

struct PowerSplit {
  double p_d = 0.0;
  double p_dr = 0.0;
  double p_dnr = 0.0;
};

/// Data budget after the side channel, divided so that non-ROI pixels receive eta times the
/// per-pixel power of ROI pixels. An empty region hands its share to the other one.
inline PowerSplit split_power(double p_t, double p_s, double eta, std::size_t s_r, std::size_t s_nr) {
  if (!(p_t > p_s)) {
    throw Error(ErrorKind::InfeasibleBudget, "total power " + std::to_string(p_t) +
                                                 " does not exceed side-info power " +
                                                 std::to_string(p_s));
  }
  if (!(p_s >= 0.0)) throw Error(ErrorKind::Domain, "side-info power must be non-negative");
  if (!(eta >= 0.0 && eta <= 1.0)) throw Error(ErrorKind::Domain, "eta must lie in [0, 1]");
  if (s_r + s_nr == 0) throw Error(ErrorKind::Validation, "frame has no pixels");

  PowerSplit split;
  split.p_d = p_t - p_s;
  if (s_r == 0) {
    split.p_dnr = split.p_d;
  } else if (s_nr == 0) {
    split.p_dr = split.p_d;
  } else {
    const double r = static_cast<double>(s_r);
    const double nr = eta * static_cast<double>(s_nr);
    split.p_dr = r / (nr + r) * split.p_d;
    split.p_dnr = nr / (nr + r) * split.p_d;
  }
  return split;
}

inline bool is_silent(double lambda) { return !(lambda > kPowerFloor); }

namespace detail {

// g_i = lambda_i^(-1/4) sqrt(p w_i / sum_j sqrt(lambda_j) w_j) over active blocks.
inline std::vector<double> weighted_gains(std::span<const double> lambdas,
                                          std::span<const double> weights,
                                          const std::vector<bool>& active, double p) {
  std::vector<double> gains(lambdas.size(), 0.0);
  double norm = 0.0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (active[i]) norm += std::sqrt(lambdas[i]) * weights[i];
  }
  if (norm == 0.0 || !(p > 0.0)) return gains;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (active[i]) gains[i] = std::pow(lambdas[i], -0.25) * std::sqrt(p * weights[i] / norm);
  }
  return gains;
}

inline std::vector<bool> active_set(std::span<const double> lambdas, const std::vector<bool>& skip) {
  std::vector<bool> active(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    active[i] = !is_silent(lambdas[i]) && (skip.empty() || !skip[i]);
  }
  return active;
}

// Correlation weights sqrt(ell_i / ell_ref); ell_ref is the first active block so that equal
// inputs produce weights of exactly 1.
inline std::vector<double> corr_weights(std::span<const double> ells, const std::vector<bool>& active) {
  std::vector<double> w(ells.size(), 1.0);
  double ref = 0.0;
  for (std::size_t i = 0; i < ells.size(); ++i) {
    if (active[i]) {
      ref = ells[i];
      break;
    }
  }
  if (ref <= 0.0) return w;
  for (std::size_t i = 0; i < ells.size(); ++i) w[i] = std::sqrt(ells[i] / ref);
  return w;
}

}  // namespace detail

/// Variance-only scaling. Silent or skipped blocks get gain 0.
inline std::vector<double> softcast_gains(std::span<const double> lambdas, double p,
                                          const std::vector<bool>& skip = {}) {
  const auto active = detail::active_set(lambdas, skip);
  const std::vector<double> ones(lambdas.size(), 1.0);
  return detail::weighted_gains(lambdas, ones, active, p);
}

/// Variance and correlation scaling.
inline std::vector<double> kmvcast_gains(std::span<const double> lambdas, std::span<const double> ells,
                                         double p, const std::vector<bool>& skip = {}) {
  if (ells.size() != lambdas.size()) throw Error(ErrorKind::Validation, "lambda/ell size mismatch");
  const auto active = detail::active_set(lambdas, skip);
  const auto weights = detail::corr_weights(ells, active);
  return detail::weighted_gains(lambdas, weights, active, p);
}

/// Uniform energy per active block; stands in for correlation-assisted baselines.
inline std::vector<double> equal_gains(std::span<const double> lambdas, double p,
                                       const std::vector<bool>& skip = {}) {
  const auto active = detail::active_set(lambdas, skip);
  const auto n = static_cast<double>(std::count(active.begin(), active.end(), true));
  std::vector<double> gains(lambdas.size(), 0.0);
  if (n == 0.0 || !(p > 0.0)) return gains;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (active[i]) gains[i] = std::sqrt(p / (n * lambdas[i]));
  }
  return gains;
}

/// Budget and per-block scaling for one frame.
struct PowerPlan {
  Scheme scheme = Scheme::RoicCast;
  double p_t = 0.0;
  double p_s = 0.0;
  double p_d = 0.0;
  double p_dr = 0.0;
  double p_dnr = 0.0;
  double eta = 0.5;
  std::size_t s_r = 0;
  std::size_t s_nr = 0;
  std::vector<double> gains;
  std::vector<bool> skipped;
};

/// Per-region kmvcast allocation: ROI blocks share p_dr, the rest share p_dnr.
/// A region with no active blocks hands its budget to the other region.
inline std::vector<double> roiccast_gains(std::span<const double> lambdas, std::span<const double> ells,
                                          const RoiMask& mask, PowerPlan& plan,
                                          const std::vector<bool>& skip = {}) {
  const std::size_t n = lambdas.size();
  if (ells.size() != n || mask.size() != n) {
    throw Error(ErrorKind::Validation, "block statistics and mask differ in length");
  }
  const auto active = detail::active_set(lambdas, skip);
  std::vector<std::size_t> roi;
  std::vector<std::size_t> nonroi;
  bool roi_active = false;
  bool nonroi_active = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i]) {
      roi.push_back(i);
      roi_active = roi_active || active[i];
    } else {
      nonroi.push_back(i);
      nonroi_active = nonroi_active || active[i];
    }
  }
  if (!roi_active && plan.p_dr != 0.0) {
    plan.p_dnr += plan.p_dr;
    plan.p_dr = 0.0;
  }
  if (!nonroi_active && plan.p_dnr != 0.0) {
    plan.p_dr += plan.p_dnr;
    plan.p_dnr = 0.0;
  }

  std::vector<double> gains(n, 0.0);
  auto allocate = [&](const std::vector<std::size_t>& members, double budget) {
    std::vector<double> l;
    std::vector<double> e;
    std::vector<bool> s;
    for (std::size_t j = 0; j < members.size(); ++j) {
      l.push_back(lambdas[members[j]]);
      e.push_back(ells[members[j]]);
      s.push_back(!active[members[j]]);
    }
    const auto g = kmvcast_gains(l, e, budget, s);
    for (std::size_t j = 0; j < members.size(); ++j) gains[members[j]] = g[j];
  };
  allocate(roi, plan.p_dr);
  allocate(nonroi, plan.p_dnr);
  return gains;
}

inline std::vector<double> roiccast_gains(std::span<const DctBlock> blocks, PowerPlan& plan,
                                          const std::vector<bool>& skip = {}) {
  std::vector<double> lambdas;
  std::vector<double> ells;
  RoiMask mask(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    lambdas.push_back(blocks[i].lambda);
    ells.push_back(blocks[i].ell);
    mask.set(i, blocks[i].roi);
  }
  return roiccast_gains(lambdas, ells, mask, plan, skip);
}

/// Weighted reconstruction objective sum ell_i m sigma^2 / g_i^2 over blocks with positive gain.
inline double allocation_objective(std::span<const double> gains, std::span<const double> ells,
                                   double sigma_sq, int m = kBlockCoeffs) {
  double acc = 0.0;
  for (std::size_t i = 0; i < gains.size(); ++i) {
    if (gains[i] > 0.0) acc += ells[i] * m * sigma_sq / (gains[i] * gains[i]);
  }
  return acc;
}

struct OracleResult {
  std::vector<double> gains;
  double objective = 0.0;
};

/// Direct numerical minimization of the weighted objective under sum g^2 lambda = p.
/// Works on energy shares x_i = g_i^2 lambda_i: scales one share at a time by (1 +- step),
/// rescales all shares back onto the budget, keeps improving moves, and halves the step
/// when a sweep makes no progress. Stops once the step drops below `resolution`.
inline OracleResult oracle_gains(std::span<const double> lambdas, std::span<const double> ells,
                                 double p, double resolution = 1e-10, double sigma_sq = 1e-3,
                                 int m = kBlockCoeffs) {
  const std::size_t n = lambdas.size();
  if (n == 0 || n > 8) throw Error(ErrorKind::Domain, "oracle handles 1..8 blocks");
  if (ells.size() != n) throw Error(ErrorKind::Validation, "lambda/ell size mismatch");

  std::vector<double> cost(n);
  for (std::size_t i = 0; i < n; ++i) cost[i] = ells[i] * lambdas[i] * m * sigma_sq;
  auto f = [&cost](const std::vector<double>& x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += cost[i] / x[i];
    return acc;
  };
  auto project = [p](std::vector<double>& x) {
    const double total = std::accumulate(x.begin(), x.end(), 0.0);
    for (auto& v : x) v *= p / total;
  };

  std::vector<double> x(n, p / static_cast<double>(n));
  double best = f(x);
  double step = 0.5;
  while (step >= resolution && n > 1) {
    bool improved = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (double dir : {1.0, -1.0}) {
        // Keep stretching in a successful direction.
        double local = step;
        while (true) {
          std::vector<double> trial = x;
          trial[i] *= 1.0 + dir * local;
          project(trial);
          const double value = f(trial);
          if (!(value < best)) break;
          x = std::move(trial);
          best = value;
          improved = true;
          local = std::min(local * 2.0, 0.9);
        }
      }
    }
    if (!improved) step *= 0.5;
  }

  OracleResult out;
  out.gains.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.gains[i] = std::sqrt(x[i] / lambdas[i]);
  out.objective = allocation_objective(out.gains, ells, sigma_sq, m);
  return out;
}

inline constexpr int kSymbolsPerBlock = kBlockCoeffs / 2;

/// Chooses which blocks fit in the analog bandwidth left after the side channel. Blocks are
/// taken whole in descending power (ties by index); silent blocks never consume symbols.
/// Returns the skip flags (true = not transmitted).
inline std::vector<bool> prune_to_bandwidth(std::span<const double> lambdas,
                                            std::size_t symbol_budget,
                                            std::size_t sideinfo_symbols) {
  if (symbol_budget < sideinfo_symbols) {
    throw Error(ErrorKind::InfeasibleBandwidth,
                "symbol budget " + std::to_string(symbol_budget) + " below side-info cost " +
                    std::to_string(sideinfo_symbols));
  }
  const std::size_t room = (symbol_budget - sideinfo_symbols) / kSymbolsPerBlock;
  std::vector<std::size_t> order(lambdas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lambdas[a] > lambdas[b]; });
  std::vector<bool> skipped(lambdas.size(), true);
  std::size_t kept = 0;
  for (std::size_t i : order) {
    if (is_silent(lambdas[i])) continue;
    if (kept == room) break;
    skipped[i] = false;
    ++kept;
  }
  return skipped;
}

}  // namespace roicast
