// Experiment runner: single frames, eta and SNR sweeps, and fading traces, all as CSV.
//
// Exit codes: 0 success, 1 usage or input error, 2 infeasible configuration,
// 3 invariant anomaly.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "roicast/roicast.hpp"

namespace fs = std::filesystem;
using namespace roicast;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitAnomaly = 3;

std::ofstream open_csv(const fs::path& path, const ExperimentConfig& cfg, const std::string& command,
                       const char* columns) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << "# roicast_sim " << command << "\n" << describe(cfg) << columns << "\n";
  return out;
}

std::vector<int> parse_frame_list(const std::vector<std::string>& items) {
  std::vector<int> frames;
  for (const auto& item : items) {
    const auto colon = item.find(':');
    int lo = 0;
    int hi = 0;
    if (colon == std::string::npos) {
      if (!detail::parse_int(item, lo)) throw Error(ErrorKind::Parse, "bad frame \"" + item + "\"");
      frames.push_back(lo);
      continue;
    }
    if (!detail::parse_int(item.substr(0, colon), lo) || !detail::parse_int(item.substr(colon + 1), hi) ||
        hi < lo) {
      throw Error(ErrorKind::Parse, "bad frame range \"" + item + "\"");
    }
    for (int f = lo; f <= hi; ++f) frames.push_back(f);
  }
  return frames;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Region-of-interest aware pseudo-analog video transmission simulator"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file (keys are long option names)");

  ExperimentConfig cfg;
  std::string format = "yuv420";
  std::string scheme = "roiccast";
  std::string channel = "awgn";
  std::string decoder = "zf";
  std::string whiten = "auto";
  std::string mcs_path;
  std::vector<std::string> schemes;
  std::vector<std::string> frame_items;
  double p_t = 0.0;
  long long budget = -1;
  fs::path out_dir = ".";

  app.add_option("--video", cfg.video, "raw video file")->required();
  app.add_option("--width", cfg.width, "frame width")->capture_default_str();
  app.add_option("--height", cfg.height, "frame height")->capture_default_str();
  app.add_option("--format", format, "yuv420 or luma")->check(CLI::IsMember({"yuv420", "luma"}))->capture_default_str();
  app.add_option("--roi", cfg.roi_csv, "ROI rectangles, frame,x,y,w,h per line");
  app.add_option("--reference", cfg.reference_index, "reference frame index")->capture_default_str();
  app.add_option("--frame", cfg.frame_index, "transmitted frame index")->capture_default_str();
  app.add_option("--scheme", scheme, "softcast | kmvcast | roiccast | equal")
      ->check(CLI::IsMember({"softcast", "kmvcast", "roiccast", "equal"}))->capture_default_str();
  app.add_option("--eta", cfg.eta, "non-ROI to ROI per-pixel power ratio")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  app.add_option("--pt", p_t, "total power per frame (default: derived from SNR and bandwidth)");
  app.add_option("--sigma0-sq", cfg.sigma0_sq, "complex noise variance per symbol")->capture_default_str();
  app.add_option("--snr", cfg.snr_db, "channel SNR in dB")->capture_default_str();
  app.add_option("--budget", budget, "symbol budget per frame (default: unpruned stream)");
  app.add_option("--decoder", decoder, "zf or llse")->check(CLI::IsMember({"zf", "llse"}))->capture_default_str();
  app.add_option("--radius", cfg.search_radius, "block-matching search radius")->capture_default_str();
  app.add_option("--channel", channel, "awgn or rayleigh")->check(CLI::IsMember({"awgn", "rayleigh"}))->capture_default_str();
  app.add_option("--seed", cfg.seed, "channel RNG seed")->capture_default_str();
  app.add_option("--packet-len", cfg.packet_len, "symbols per fading packet")->capture_default_str();
  app.add_option("--whiten", whiten, "on, off or auto (auto: on for fade-trace)")
      ->check(CLI::IsMember({"on", "off", "auto"}))->capture_default_str();
  app.add_flag("--ofdm", cfg.ofdm, "frame symbols onto 64-subcarrier OFDM blocks");
  app.add_flag("--analytic", cfg.analytic, "report PSNR from expected distortion instead of one realization");
  app.add_option("--mcs-table", mcs_path, "MCS table file: beta_db,cqi,modulation,ecr");
  app.add_option("--etas", cfg.etas, "eta values for sweep-eta")->delimiter(',');
  app.add_option("--snrs", cfg.snrs, "SNR values for sweep-snr")->delimiter(',');
  app.add_option("--schemes", schemes, "schemes for sweep-snr")->delimiter(',');
  app.add_option("--frames", frame_items, "frames for fade-trace, e.g. 1:100")->delimiter(',');
  app.add_option("--out", out_dir, "output directory")->capture_default_str();

  auto* run_cmd = app.add_subcommand("run", "transmit one frame")->fallthrough();
  auto* eta_cmd = app.add_subcommand("sweep-eta", "PSNR versus eta")->fallthrough();
  auto* snr_cmd = app.add_subcommand("sweep-snr", "PSNR versus channel SNR per scheme")->fallthrough();
  auto* fade_cmd = app.add_subcommand("fade-trace", "per-packet SNR and per-frame PSNR over Rayleigh fading")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    cfg.format = format == "luma" ? RawFormat::LumaOnly : RawFormat::Yuv420;
    cfg.scheme = parse_scheme(scheme);
    cfg.channel = parse_channel_kind(channel);
    cfg.decoder = parse_decoder(decoder);
    if (p_t > 0.0) cfg.p_t = p_t;
    if (budget >= 0) cfg.symbol_budget = static_cast<std::size_t>(budget);
    if (!mcs_path.empty()) cfg.mcs_table = load_mcs_table(mcs_path);
    for (const auto& s : schemes) cfg.schemes.push_back(parse_scheme(s));
    cfg.frames = parse_frame_list(frame_items);
    cfg.whitening = whiten == "on" || (whiten == "auto" && fade_cmd->parsed());
    cfg.validate();
    fs::create_directories(out_dir);

    if (run_cmd->parsed()) {
      const auto result = run_frame(cfg, cfg.frame_index);
      auto csv = open_csv(out_dir / "run.csv", cfg, "run", kRunColumns);
      const auto row = run_row(result, cfg.seed);
      csv << row << "\n";
      std::cout << kRunColumns << "\n" << row << "\n";
      if (result.realized) {
        write_frame_pgm(result.reconstructed,
                        out_dir / ("frame_" + std::to_string(cfg.frame_index) + "_" + to_string(cfg.scheme) + ".pgm"));
      }
    } else if (eta_cmd->parsed()) {
      const SceneSource source(cfg);
      const auto rows = run_eta_sweep(source.scene(cfg.frame_index), cfg);
      auto csv = open_csv(out_dir / "sweep_eta.csv", cfg, "sweep-eta", kEtaColumns);
      for (const auto& r : rows) {
        csv << detail::fmt(r.eta) << ',' << detail::fmt(r.psnr.overall) << ',' << detail::fmt(r.psnr.roi) << ','
            << detail::fmt(r.psnr.nonroi) << "\n";
      }
      if (cfg.analytic) {
        if (const auto bad = eta_trend_violation(rows)) throw Error(ErrorKind::Anomaly, *bad);
      }
    } else if (snr_cmd->parsed()) {
      const SceneSource source(cfg);
      const auto rows = run_snr_sweep(source.scene(cfg.frame_index), cfg);
      auto csv = open_csv(out_dir / "sweep_snr.csv", cfg, "sweep-snr", kSnrColumns);
      for (const auto& r : rows) {
        csv << detail::fmt(r.snr_db) << ',' << to_string(r.scheme) << ',' << detail::fmt(r.psnr.overall) << ','
            << detail::fmt(r.psnr.roi) << ',' << detail::fmt(r.psnr.nonroi) << "\n";
      }
    } else if (fade_cmd->parsed()) {
      SceneSource source(cfg);
      source.preload(cfg.frames);
      const auto rows = run_fading_trace(source, cfg);
      auto packets = open_csv(out_dir / "fade_packets.csv", cfg, "fade-trace", kFadePacketColumns);
      auto frames = open_csv(out_dir / "fade_frames.csv", cfg, "fade-trace", kFadeFrameColumns);
      for (const auto& r : rows) {
        for (std::size_t p = 0; p < r.packet_snr_db.size(); ++p) {
          packets << r.frame_index << ',' << p << ',' << detail::fmt(r.packet_snr_db[p]) << "\n";
        }
        frames << r.frame_index << ',' << detail::fmt(r.psnr.overall) << ',' << detail::fmt(r.psnr.roi) << ','
               << detail::fmt(r.psnr.nonroi) << "\n";
      }
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    if (e.infeasible()) return kExitInfeasible;
    if (e.kind() == ErrorKind::Anomaly || e.kind() == ErrorKind::Integrity) return kExitAnomaly;
    return kExitUsage;
  }
  return 0;
}
