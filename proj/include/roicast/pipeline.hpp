#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <future>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "roicast/channel.hpp"
#include "roicast/correlation.hpp"
#include "roicast/error.hpp"
#include "roicast/media_io.hpp"
#include "roicast/metrics.hpp"
#include "roicast/power_alloc.hpp"
#include "roicast/receiver.hpp"
#include "roicast/roi_coding.hpp"
#include "roicast/sideinfo.hpp"
#include "roicast/transform.hpp"

namespace roicast {

struct ExperimentConfig {
  std::filesystem::path video;
  int width = 176;
  int height = 144;
  RawFormat format = RawFormat::Yuv420;
  std::filesystem::path roi_csv;
  int reference_index = 0;
  int frame_index = 1;

  Scheme scheme = Scheme::RoicCast;
  double eta = 0.5;
  std::optional<double> p_t;           // overrides the SNR-derived budget
  double sigma0_sq = 1e-3;
  double snr_db = 10.0;
  std::optional<std::size_t> symbol_budget;
  Decoder decoder = Decoder::ZeroForcing;
  int search_radius = kDefaultSearchRadius;

  ChannelKind channel = ChannelKind::Awgn;
  std::uint64_t seed = 1;
  std::size_t packet_len = 48;
  bool whitening = false;
  bool ofdm = false;
  bool analytic = false;

  McsTable mcs_table = default_mcs_table();

  std::vector<double> etas;
  std::vector<double> snrs;
  std::vector<int> frames;
  std::vector<Scheme> schemes;

  void validate() const {
    if (!(eta >= 0.0 && eta <= 1.0)) throw Error(ErrorKind::Validation, "eta must lie in [0, 1]");
    if (!(sigma0_sq > 0.0)) throw Error(ErrorKind::Validation, "sigma0_sq must be positive");
    if (p_t && !(*p_t > 0.0)) throw Error(ErrorKind::Validation, "p_t must be positive");
    if (search_radius < 0) throw Error(ErrorKind::Validation, "search radius must be non-negative");
    if (packet_len < 1) throw Error(ErrorKind::Validation, "packet length must be positive");
    validate_mcs_table(mcs_table);
  }
};

/// Resolved configuration as `# key=value` lines; prefixed to every CSV.
inline std::string describe(const ExperimentConfig& c) {
  std::ostringstream os;
  auto list = [](const auto& v) {
    std::ostringstream s;
    for (std::size_t i = 0; i < v.size(); ++i) s << (i ? ";" : "") << v[i];
    return s.str();
  };
  std::vector<std::string> schemes;
  for (auto s : c.schemes) schemes.emplace_back(to_string(s));
  os << "# video=" << c.video.string() << "\n"
     << "# width=" << c.width << "\n# height=" << c.height << "\n"
     << "# format=" << (c.format == RawFormat::Yuv420 ? "yuv420" : "luma") << "\n"
     << "# roi=" << c.roi_csv.string() << "\n"
     << "# reference=" << c.reference_index << "\n# frame=" << c.frame_index << "\n"
     << "# scheme=" << to_string(c.scheme) << "\n# eta=" << c.eta << "\n"
     << "# p_t=" << (c.p_t ? std::to_string(*c.p_t) : std::string("auto")) << "\n"
     << "# sigma0_sq=" << c.sigma0_sq << "\n# snr_db=" << c.snr_db << "\n"
     << "# symbol_budget="
     << (c.symbol_budget ? std::to_string(*c.symbol_budget) : std::string("auto")) << "\n"
     << "# decoder=" << to_string(c.decoder) << "\n# radius=" << c.search_radius << "\n"
     << "# channel=" << to_string(c.channel) << "\n# seed=" << c.seed << "\n"
     << "# packet_len=" << c.packet_len << "\n# whiten=" << c.whitening << "\n"
     << "# ofdm=" << c.ofdm << "\n# analytic=" << c.analytic << "\n"
     << "# etas=" << list(c.etas) << "\n# snrs=" << list(c.snrs) << "\n"
     << "# frames=" << list(c.frames) << "\n# schemes=" << list(schemes) << "\n";
  return os.str();
}

/// Inputs of one frame transmission.
struct Scene {
  LumaFrame frame;
  LumaFrame reference;
  std::vector<RoiRect> rects;
};

/// Transmitter-side analysis of a frame (everything before allocation).
struct FrameAnalysis {
  BlockGrid grid;
  RoiMask mask;
  std::vector<DctBlock> blocks;
  SideInfo sideinfo;
};

inline FrameAnalysis analyze_frame(const Scene& scene, int search_radius = kDefaultSearchRadius) {
  FrameAnalysis a;
  const auto parts = partition_blocks(scene.frame);
  a.grid = parts.grid;
  a.mask = classify_blocks(a.grid, scene.rects);
  a.blocks.resize(parts.blocks.size());
  a.sideinfo.n_blocks = a.grid.count();
  a.sideinfo.spans = rlc_encode(a.mask);
  a.sideinfo.lambda_codes.resize(parts.blocks.size());
  a.sideinfo.k_codes.resize(parts.blocks.size());
  for (std::size_t i = 0; i < parts.blocks.size(); ++i) {
    auto& b = a.blocks[i];
    b.index = static_cast<int>(i);
    b.coeffs = dct2_forward(parts.blocks[i]);
    b.lambda = block_power(b.coeffs);
    b.k = match_block(parts.blocks[i], scene.reference, a.grid, b.index, search_radius).k;
    b.roi = a.mask[i];
    a.sideinfo.lambda_codes[i] = quantize_lambda(b.lambda);
    a.sideinfo.k_codes[i] = quantize_k(b.k);
    b.ell = corr_gain(dequantize_k(a.sideinfo.k_codes[i]));
  }
  return a;
}

/// Shared allocation parameters known at both ends of the link.
struct LinkBudget {
  Scheme scheme = Scheme::RoicCast;
  double eta = 0.5;
  double p_t = 0.0;
  double p_s = 0.0;            // frame-level side-info share, same units as p_t
  std::size_t symbol_budget = 0;
  std::size_t sideinfo_symbols = 0;
};

/// Allocation computed purely from decoded side info, so the receiver reproduces it exactly.
inline PowerPlan plan_from_sideinfo(const SideInfo& info, const LinkBudget& link) {
  const std::size_t n = static_cast<std::size_t>(info.n_blocks);
  std::vector<double> lambda_hat(n);
  std::vector<double> ell_hat(n);
  for (std::size_t i = 0; i < n; ++i) {
    lambda_hat[i] = dequantize_lambda(info.lambda_codes[i]);
    ell_hat[i] = corr_gain(dequantize_k(info.k_codes[i]));
  }
  const RoiMask mask = rlc_decode(info.spans, n);

  PowerPlan plan;
  plan.scheme = link.scheme;
  plan.eta = link.eta;
  plan.p_t = link.p_t;
  plan.p_s = link.p_s;
  plan.skipped = prune_to_bandwidth(lambda_hat, link.symbol_budget, link.sideinfo_symbols);

  if (link.scheme == Scheme::RoicCast) {
    plan.s_r = mask.roi_pixels();
    plan.s_nr = mask.nonroi_pixels();
  } else {
    plan.s_r = 0;
    plan.s_nr = n * kBlockCoeffs;
  }
  const auto split = split_power(link.p_t, link.p_s, link.eta, plan.s_r, plan.s_nr);
  plan.p_d = split.p_d;
  plan.p_dr = split.p_dr;
  plan.p_dnr = split.p_dnr;

  switch (link.scheme) {
    case Scheme::SoftCast: plan.gains = softcast_gains(lambda_hat, plan.p_d, plan.skipped); break;
    case Scheme::KmvCast:
      plan.gains = kmvcast_gains(lambda_hat, ell_hat, plan.p_d, plan.skipped);
      break;
    case Scheme::Equal: plan.gains = equal_gains(lambda_hat, plan.p_d, plan.skipped); break;
    case Scheme::RoicCast:
      plan.gains = roiccast_gains(lambda_hat, ell_hat, mask, plan, plan.skipped);
      break;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(plan.gains[i] > 0.0)) plan.skipped[i] = true;
  }
  return plan;
}

struct FrameResult {
  int frame_index = 0;
  Scheme scheme = Scheme::RoicCast;
  double eta = 0.0;
  double snr_db = 0.0;
  QualityReport quality;          // noisy realization (absent content in analytic mode)
  DistortionReport distortion;    // analytic
  LumaFrame reconstructed;
  PowerPlan plan;
  SideInfoPacket packet;
  std::size_t data_symbols = 0;
  std::size_t symbol_budget = 0;
  std::vector<double> packet_snr_db;
  bool realized = false;
};

/// Kept block indices in transmission order.
inline std::vector<std::size_t> kept_blocks(const PowerPlan& plan) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < plan.skipped.size(); ++i) {
    if (!plan.skipped[i]) kept.push_back(i);
  }
  return kept;
}

/// Link budget for an analyzed frame. The default bandwidth is what the unpruned stream needs;
/// the default power keeps the average symbol power at snr * sigma0_sq over that bandwidth.
inline LinkBudget make_link_budget(const ExperimentConfig& cfg, const FrameAnalysis& a,
                                   const SideInfoPacket& packet) {
  LinkBudget link;
  link.scheme = cfg.scheme;
  link.eta = cfg.eta;
  link.sideinfo_symbols = packet.symbol_count;
  std::size_t active = 0;
  for (auto code : a.sideinfo.lambda_codes) active += is_silent(dequantize_lambda(code)) ? 0 : 1;
  link.symbol_budget = cfg.symbol_budget.value_or(packet.symbol_count + active * kSymbolsPerBlock);
  const double snr = std::pow(10.0, cfg.snr_db / 10.0);
  link.p_t = cfg.p_t.value_or(snr * cfg.sigma0_sq * static_cast<double>(link.symbol_budget) /
                              kBlockCoeffs);
  link.p_s = packet.p_s * static_cast<double>(packet.symbol_count) / kBlockCoeffs;
  return link;
}

/// Full transmit / channel / receive chain for one frame.
inline FrameResult run_scene(const Scene& scene, const ExperimentConfig& cfg, int frame_index) {
  cfg.validate();
  FrameResult res;
  res.frame_index = frame_index;
  res.scheme = cfg.scheme;
  res.eta = cfg.eta;
  res.snr_db = cfg.snr_db;

  // Transmitter.
  const FrameAnalysis a = analyze_frame(scene, cfg.search_radius);
  const McsEntry mcs = select_mcs(cfg.snr_db, cfg.mcs_table);
  res.packet = build_packet(a.sideinfo, mcs, cfg.sigma0_sq);
  const LinkBudget link = make_link_budget(cfg, a, res.packet);
  res.symbol_budget = link.symbol_budget;
  res.plan = plan_from_sideinfo(a.sideinfo, link);

  const std::size_t n = a.blocks.size();
  std::vector<double> lambda_hat(n);
  for (std::size_t i = 0; i < n; ++i) lambda_hat[i] = dequantize_lambda(a.sideinfo.lambda_codes[i]);
  const double sigma_eff = effective_noise(cfg.sigma0_sq);
  res.distortion = analytic_distortion(res.plan.gains, res.plan.skipped, lambda_hat, a.mask, sigma_eff);

  const auto kept = kept_blocks(res.plan);
  res.data_symbols = (kept.size() * kBlockCoeffs + 1) / 2;
  if (cfg.analytic) return res;

  // Coefficient-major order so that each 64-value whitening chunk spans 64 different blocks;
  // whitened chunks are then interleaved so one fading packet touches many chunks.
  std::vector<double> stream;
  stream.reserve(kept.size() * kBlockCoeffs);
  for (int m = 0; m < kBlockCoeffs; ++m) {
    for (std::size_t b : kept) stream.push_back(res.plan.gains[b] * a.blocks[b].coeffs[m]);
  }
  Whitened white;
  if (cfg.whitening) {
    white = whiten(stream);
    white.values = interleave_chunks(white.values);
  } else {
    white.values = std::move(stream);
  }
  const IqPacked iq = iq_pack(white.values);

  ChannelConfig ch;
  ch.kind = cfg.channel;
  ch.sigma0_sq = cfg.sigma0_sq;
  ch.seed = cfg.seed;
  ch.whitening = cfg.whitening;
  ch.mean_snr_db = cfg.snr_db;

  std::vector<Complex> rx_symbols;
  if (cfg.ofdm) {
    const auto blocks = ofdm_frame(iq.symbols);
    std::vector<Complex> samples;
    samples.reserve(blocks.size() * kOfdmSize);
    for (const auto& b : blocks) samples.insert(samples.end(), b.begin(), b.end());
    ch.packet_len = kOfdmSize;
    auto received = transmit(samples, ch, static_cast<std::uint64_t>(frame_index));
    received.sideinfo_symbols = res.packet.symbol_count;
    res.packet_snr_db = received.snr_db;
    const auto eq = equalize(received, ch.packet_len);
    std::vector<OfdmBlock> rx_blocks(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      std::copy_n(eq.begin() + static_cast<std::ptrdiff_t>(b * kOfdmSize), kOfdmSize, rx_blocks[b].begin());
    }
    rx_symbols = ofdm_deframe(rx_blocks, iq.symbols.size());
  } else {
    ch.packet_len = cfg.packet_len;
    auto received = transmit(iq.symbols, ch, static_cast<std::uint64_t>(frame_index));
    received.sideinfo_symbols = res.packet.symbol_count;
    res.packet_snr_db = received.snr_db;
    rx_symbols = equalize(received, ch.packet_len);
  }

  // Receiver: side info arrives intact; allocation is recomputed from it.
  const SideInfo rx_info = parse_packet(res.packet);
  const PowerPlan rx_plan = plan_from_sideinfo(rx_info, link);
  if (rx_plan.gains != res.plan.gains || rx_plan.skipped != res.plan.skipped) {
    throw Error(ErrorKind::Integrity, "receiver allocation differs from transmitter");
  }
  auto values = iq_unpack(rx_symbols, iq.pad);
  if (cfg.whitening) values = dewhiten(deinterleave_chunks(values), white.pad);

  const RoiMask rx_mask = rlc_decode(rx_info.spans, n);
  std::vector<ReceivedBlock> rx_blocks(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& rb = rx_blocks[i];
    rb.index = static_cast<int>(i);
    rb.gain = rx_plan.gains[i];
    rb.lambda_hat = dequantize_lambda(rx_info.lambda_codes[i]);
    rb.k_hat = dequantize_k(rx_info.k_codes[i]);
    rb.roi = rx_mask[i];
    rb.skipped = rx_plan.skipped[i];
  }
  for (std::size_t j = 0; j < kept.size(); ++j) {
    auto& rb = rx_blocks[kept[j]];
    rb.coeffs.resize(kBlockCoeffs);
    for (int m = 0; m < kBlockCoeffs; ++m) rb.coeffs[m] = values[m * kept.size() + j];
  }
  res.reconstructed = reconstruct_frame(rx_blocks, a.grid, cfg.decoder, sigma_eff);
  res.quality = quality_report(scene.frame, res.reconstructed, a.mask);
  res.realized = true;
  return res;
}

// ---------------------------------------------------------------------------------------------
// File-backed runs and sweeps
// ---------------------------------------------------------------------------------------------

/// Loads the frames named in the config once; sweeps share this read-only.
class SceneSource {
 public:
  explicit SceneSource(const ExperimentConfig& cfg) : cfg_(cfg) {
    if (!cfg.roi_csv.empty()) rois_ = load_roi_rects(cfg.roi_csv, cfg.width, cfg.height);
    reference_ = load_yuv_frames(cfg.video, cfg.width, cfg.height, {cfg.reference_index}, cfg.format).front();
  }

  SceneSource(LumaFrame reference, std::map<int, LumaFrame> frames, RoiTable rois)
      : reference_(std::move(reference)), frames_(std::move(frames)), rois_(std::move(rois)) {}

  Scene scene(int frame_index) const {
    Scene s;
    s.reference = reference_;
    if (const auto it = frames_.find(frame_index); it != frames_.end()) {
      s.frame = it->second;
    } else {
      s.frame = load_yuv_frames(cfg_.video, cfg_.width, cfg_.height, {frame_index}, cfg_.format).front();
    }
    s.rects = rects_for(rois_, frame_index);
    return s;
  }

  void preload(const std::vector<int>& indices) {
    std::vector<int> missing;
    for (int i : indices) {
      if (!frames_.count(i)) missing.push_back(i);
    }
    if (missing.empty()) return;
    auto loaded = load_yuv_frames(cfg_.video, cfg_.width, cfg_.height, missing, cfg_.format);
    for (std::size_t i = 0; i < missing.size(); ++i) frames_[missing[i]] = std::move(loaded[i]);
  }

 private:
  ExperimentConfig cfg_;
  LumaFrame reference_;
  std::map<int, LumaFrame> frames_;
  RoiTable rois_;
};

inline FrameResult run_frame(const ExperimentConfig& cfg, int frame_index) {
  const SceneSource source(cfg);
  return run_scene(source.scene(frame_index), cfg, frame_index);
}

namespace detail {

/// Evaluates f(0..n-1) on a small worker pool and returns results in index order.
template <typename F>
auto parallel_map(std::size_t n, F&& f) -> std::vector<decltype(f(std::size_t{}))> {
  using R = decltype(f(std::size_t{}));
  std::vector<std::optional<R>> slots(n);
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));
  std::vector<std::future<void>> jobs;
  std::atomic<std::size_t> next{0};
  for (std::size_t w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&]() {
      for (std::size_t i = next++; i < n; i = next++) slots[i].emplace(f(i));
    }));
  }
  for (auto& j : jobs) j.get();
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

inline std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

}  // namespace detail

/// PSNR pair reported by sweeps: analytic values in analytic mode, realized otherwise.
struct PsnrPoint {
  double overall = 0.0;
  std::optional<double> roi;
  std::optional<double> nonroi;
};

inline PsnrPoint reported_psnr(const FrameResult& r) {
  if (r.realized) return {r.quality.psnr_overall, r.quality.psnr_roi, r.quality.psnr_nonroi};
  return {r.distortion.psnr_overall, r.distortion.psnr_roi, r.distortion.psnr_nonroi};
}

inline constexpr const char* kRunColumns =
    "frame,scheme,eta,snr_db,seed,psnr_overall,psnr_roi,psnr_nonroi,analytic_psnr_overall,"
    "analytic_psnr_roi,side_bits,side_symbols,data_symbols,symbol_budget,pruned_blocks";

inline std::string run_row(const FrameResult& r, std::uint64_t seed) {
  const auto p = reported_psnr(r);
  std::size_t pruned = 0;
  for (bool s : r.plan.skipped) pruned += s ? 1 : 0;
  std::ostringstream os;
  os << r.frame_index << ',' << to_string(r.scheme) << ',' << detail::fmt(r.eta) << ','
     << detail::fmt(r.snr_db) << ',' << seed << ',' << detail::fmt(p.overall) << ','
     << detail::fmt(p.roi) << ',' << detail::fmt(p.nonroi) << ','
     << detail::fmt(r.distortion.psnr_overall) << ',' << detail::fmt(r.distortion.psnr_roi) << ','
     << r.packet.bit_count << ',' << r.packet.symbol_count << ',' << r.data_symbols << ','
     << r.symbol_budget << ',' << pruned;
  return os.str();
}

struct EtaRow {
  double eta = 0.0;
  PsnrPoint psnr;
};

inline constexpr const char* kEtaColumns = "eta,psnr_overall,psnr_roi,psnr_nonroi";

/// In analytic mode the trend is checked: overall PSNR must not fall and ROI PSNR must not rise
/// as eta grows. Violations raise an Anomaly error after computing every row.
inline std::vector<EtaRow> run_eta_sweep(const Scene& scene, const ExperimentConfig& cfg) {
  if (cfg.etas.empty()) throw Error(ErrorKind::Validation, "eta sweep needs at least one eta");
  std::vector<double> etas = cfg.etas;
  std::sort(etas.begin(), etas.end());
  auto rows = detail::parallel_map(etas.size(), [&](std::size_t i) {
    ExperimentConfig c = cfg;
    c.eta = etas[i];
    return EtaRow{etas[i], reported_psnr(run_scene(scene, c, cfg.frame_index))};
  });
  return rows;
}

inline std::optional<std::string> eta_trend_violation(const std::vector<EtaRow>& rows) {
  constexpr double kSlack = 1e-9;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].psnr.overall < rows[i - 1].psnr.overall - kSlack) {
      return "overall PSNR falls between eta " + detail::fmt(rows[i - 1].eta) + " and " +
             detail::fmt(rows[i].eta);
    }
    if (rows[i].psnr.roi && rows[i - 1].psnr.roi && *rows[i].psnr.roi > *rows[i - 1].psnr.roi + kSlack) {
      return "ROI PSNR rises between eta " + detail::fmt(rows[i - 1].eta) + " and " +
             detail::fmt(rows[i].eta);
    }
  }
  return std::nullopt;
}

struct SnrRow {
  double snr_db = 0.0;
  Scheme scheme = Scheme::RoicCast;
  PsnrPoint psnr;
};

inline constexpr const char* kSnrColumns = "snr_db,scheme,psnr_overall,psnr_roi,psnr_nonroi";

/// One row per (SNR, scheme), SNR-major. The MCS is reselected at every SNR.
inline std::vector<SnrRow> run_snr_sweep(const Scene& scene, const ExperimentConfig& cfg) {
  if (cfg.snrs.empty()) throw Error(ErrorKind::Validation, "SNR sweep needs at least one SNR");
  const std::vector<Scheme> schemes = cfg.schemes.empty() ? std::vector<Scheme>{cfg.scheme} : cfg.schemes;
  const std::size_t n = cfg.snrs.size() * schemes.size();
  return detail::parallel_map(n, [&](std::size_t i) {
    ExperimentConfig c = cfg;
    c.snr_db = cfg.snrs[i / schemes.size()];
    c.scheme = schemes[i % schemes.size()];
    return SnrRow{c.snr_db, c.scheme, reported_psnr(run_scene(scene, c, cfg.frame_index))};
  });
}

struct FadeFrame {
  int frame_index = 0;
  std::vector<double> packet_snr_db;
  PsnrPoint psnr;
};

inline constexpr const char* kFadePacketColumns = "frame,packet,snr_db";
inline constexpr const char* kFadeFrameColumns = "frame,psnr_overall,psnr_roi,psnr_nonroi";

inline std::vector<FadeFrame> run_fading_trace(const SceneSource& source, const ExperimentConfig& cfg) {
  if (cfg.frames.empty()) throw Error(ErrorKind::Validation, "fading trace needs a frame range");
  if (cfg.channel != ChannelKind::Rayleigh) {
    throw Error(ErrorKind::Validation, "fading trace requires the rayleigh channel");
  }
  ExperimentConfig c = cfg;
  c.analytic = false;
  return detail::parallel_map(cfg.frames.size(), [&](std::size_t i) {
    const int f = cfg.frames[i];
    const auto r = run_scene(source.scene(f), c, f);
    return FadeFrame{f, r.packet_snr_db, reported_psnr(r)};
  });
}

}  // namespace roicast
