#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numeric>

#include "test_util.hpp"

using namespace roicast;

namespace {

ExperimentConfig base_config() {
  ExperimentConfig cfg;
  cfg.snr_db = 5.0;
  cfg.eta = 0.5;
  return cfg;
}

// Frame tiled with one random 8x8 pattern: every block has the same power, and the frame is
// its own reference so every correlation factor is 1.
Scene tiled_scene(bool whole_roi) {
  std::mt19937_64 rng(70);
  const auto tile = test::random_frame(8, 8, rng);
  std::vector<std::uint8_t> px(176 * 144);
  for (int y = 0; y < 144; ++y)
    for (int x = 0; x < 176; ++x) px[y * 176 + x] = tile.at(x % 8, y % 8);
  const LumaFrame f(176, 144, px);
  Scene s{f, f, {}};
  if (whole_roi) s.rects = {{1, 0, 0, 176, 144}};
  return s;
}

double variance(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return acc / (v.size() - 1);
}

}  // namespace

TEST(Analyze, SideInfoMatchesBlocks) {
  const auto a = analyze_frame(test::harbour_scene(1));
  EXPECT_EQ(a.sideinfo.n_blocks, 396);
  EXPECT_EQ(rlc_decode(a.sideinfo.spans, 396), a.mask);
  EXPECT_GT(a.mask.roi_blocks(), 0u);
  EXPECT_LE(a.mask.roi_pixels(), 0.3 * 176 * 144);
  for (std::size_t i = 0; i < a.blocks.size(); ++i) {
    EXPECT_EQ(a.sideinfo.lambda_codes[i], quantize_lambda(a.blocks[i].lambda));
    EXPECT_GE(a.blocks[i].ell, 1.0);
    EXPECT_LE(a.blocks[i].ell, 64.0);
  }
}

TEST(RunScene, DeterministicUnderSeed) {
  auto cfg = base_config();
  cfg.channel = ChannelKind::Rayleigh;
  cfg.whitening = true;
  cfg.seed = 9;
  const auto scene = test::harbour_scene(2);
  const auto a = run_scene(scene, cfg, 2);
  const auto b = run_scene(scene, cfg, 2);
  EXPECT_EQ(run_row(a, cfg.seed), run_row(b, cfg.seed));
  EXPECT_EQ(a.reconstructed, b.reconstructed);
  cfg.seed = 10;
  EXPECT_NE(run_scene(scene, cfg, 2).reconstructed, a.reconstructed);
}

TEST(RunScene, NoiselessIsNearLossless) {
  auto cfg = base_config();
  cfg.snr_db = 90.0;
  for (auto scheme : {Scheme::SoftCast, Scheme::KmvCast, Scheme::RoicCast, Scheme::Equal}) {
    cfg.scheme = scheme;
    for (bool ofdm : {false, true}) {
      cfg.ofdm = ofdm;
      cfg.whitening = ofdm;
      const auto r = run_scene(test::harbour_scene(1), cfg, 1);
      EXPECT_GT(r.quality.psnr_overall, 40.0) << to_string(scheme) << " ofdm=" << ofdm;
    }
  }
}

TEST(RunScene, ReductionChainWholeFrameRoi) {
  auto cfg = base_config();
  cfg.eta = 1.0;
  cfg.analytic = true;
  const auto scene = tiled_scene(true);
  cfg.scheme = Scheme::RoicCast;
  const auto roic = run_scene(scene, cfg, 1);
  cfg.scheme = Scheme::SoftCast;
  const auto soft = run_scene(scene, cfg, 1);
  cfg.scheme = Scheme::KmvCast;
  const auto kmv = run_scene(scene, cfg, 1);
  EXPECT_EQ(roic.plan.gains, soft.plan.gains);
  EXPECT_EQ(kmv.plan.gains, soft.plan.gains);
}

TEST(RunScene, AllSchemesShareBandwidthAndSidePower) {
  auto cfg = base_config();
  cfg.analytic = true;
  const auto scene = test::harbour_scene(1);
  const auto codes = analyze_frame(scene).sideinfo.lambda_codes;
  std::vector<FrameResult> results;
  for (auto s : {Scheme::SoftCast, Scheme::KmvCast, Scheme::RoicCast, Scheme::Equal}) {
    cfg.scheme = s;
    results.push_back(run_scene(scene, cfg, 1));
  }
  for (const auto& r : results) {
    EXPECT_EQ(r.symbol_budget, results[0].symbol_budget);
    EXPECT_EQ(r.packet.symbol_count, results[0].packet.symbol_count);
    EXPECT_EQ(r.plan.p_d, results[0].plan.p_d);
    double e = 0.0;
    for (std::size_t i = 0; i < r.plan.gains.size(); ++i) {
      e += r.plan.gains[i] * r.plan.gains[i] * dequantize_lambda(codes[i]);
    }
    EXPECT_NEAR(e / r.plan.p_d, 1.0, 1e-9);
  }
}

TEST(RunScene, BandwidthPruning) {
  auto cfg = base_config();
  const auto scene = test::harbour_scene(1);
  const auto full = run_scene(scene, cfg, 1);
  EXPECT_EQ(std::count(full.plan.skipped.begin(), full.plan.skipped.end(), true), 0);
  cfg.symbol_budget = full.packet.symbol_count + 100 * kSymbolsPerBlock + 7;
  const auto pruned = run_scene(scene, cfg, 1);
  EXPECT_EQ(std::count(pruned.plan.skipped.begin(), pruned.plan.skipped.end(), false), 100);
  EXPECT_LE(pruned.data_symbols + pruned.packet.symbol_count, *cfg.symbol_budget);
  EXPECT_LT(pruned.quality.psnr_overall, full.quality.psnr_overall);
  cfg.symbol_budget = full.packet.symbol_count - 1;
  try {
    run_scene(scene, cfg, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InfeasibleBandwidth);
  }
}

TEST(RunScene, InfeasiblePower) {
  auto cfg = base_config();
  cfg.p_t = 1e-6;
  try {
    run_scene(test::harbour_scene(1), cfg, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InfeasibleBudget);
  }
}

TEST(RunScene, AnalyticMatchesRealizedAtHighSnr) {
  auto cfg = base_config();
  cfg.snr_db = 30.0;
  for (auto s : {Scheme::SoftCast, Scheme::RoicCast}) {
    cfg.scheme = s;
    const auto r = run_scene(test::harbour_scene(1), cfg, 1);
    EXPECT_NEAR(r.quality.psnr_overall, r.distortion.psnr_overall, 0.5);
  }
}

TEST(RunScene, RoiGainOverSoftcast) {
  auto cfg = base_config();
  cfg.eta = 0.25;
  cfg.analytic = true;
  for (double snr : {-5.0, 0.0, 5.0, 10.0}) {
    cfg.snr_db = snr;
    cfg.scheme = Scheme::RoicCast;
    const auto roic = run_scene(test::harbour_scene(1), cfg, 1);
    cfg.scheme = Scheme::SoftCast;
    const auto soft = run_scene(test::harbour_scene(1), cfg, 1);
    EXPECT_GT(*roic.distortion.psnr_roi, *soft.distortion.psnr_roi) << snr;
  }
}

TEST(RunScene, LowerNoiseNeverHurtsAnalyticForFixedGains) {
  auto cfg = base_config();
  cfg.analytic = true;
  const auto r = run_scene(test::harbour_scene(1), cfg, 1);
  const auto a = analyze_frame(test::harbour_scene(1));
  std::vector<double> lambda_hat;
  for (auto c : a.sideinfo.lambda_codes) lambda_hat.push_back(dequantize_lambda(c));
  double prev = -1e9;
  for (double s2 = 1e-1; s2 > 1e-7; s2 /= 3.0) {
    const double p = analytic_distortion(r.plan.gains, r.plan.skipped, lambda_hat, a.mask, s2).psnr_overall;
    EXPECT_GT(p, prev);
    prev = p;
  }
}

TEST(EtaSweep, MonotoneRows) {
  auto cfg = base_config();
  cfg.analytic = true;
  cfg.etas = {1.0, 0.25, 0.5};
  const auto rows = run_eta_sweep(test::harbour_scene(1), cfg);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].eta, 0.25);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_GT(rows[i].psnr.overall, rows[i - 1].psnr.overall);
    EXPECT_LT(*rows[i].psnr.roi, *rows[i - 1].psnr.roi);
  }
  EXPECT_FALSE(eta_trend_violation(rows));
}

TEST(EtaSweep, SingleRowMatchesRun) {
  auto cfg = base_config();
  cfg.analytic = true;
  cfg.etas = {0.4};
  cfg.eta = 0.4;
  const auto rows = run_eta_sweep(test::harbour_scene(1), cfg);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].psnr.overall, run_scene(test::harbour_scene(1), cfg, 1).distortion.psnr_overall);
}

TEST(EtaSweep, WholeFrameRoiIsFlat) {
  auto cfg = base_config();
  cfg.analytic = true;
  cfg.etas = {0.1, 0.5, 1.0};
  auto scene = test::harbour_scene(1);
  scene.rects = {{1, 0, 0, 176, 144}};
  const auto rows = run_eta_sweep(scene, cfg);
  for (const auto& r : rows) {
    EXPECT_EQ(*r.psnr.roi, *rows[0].psnr.roi);
    EXPECT_FALSE(r.psnr.nonroi.has_value());
  }
}

TEST(EtaSweep, WeightedRoiDistortionIncreases) {
  const auto a = analyze_frame(test::harbour_scene(1));
  std::vector<double> lambda, ell;
  for (std::size_t i = 0; i < a.blocks.size(); ++i) {
    lambda.push_back(dequantize_lambda(a.sideinfo.lambda_codes[i]));
    ell.push_back(a.blocks[i].ell);
  }
  double prev_dr = 1e300, prev_dnr = -1.0, prev_obj = -1.0;
  for (int step = 1; step <= 20; ++step) {
    const double eta = step / 20.0;
    PowerPlan plan;
    const auto split = split_power(10.0, 1.0, eta, a.mask.roi_pixels(), a.mask.nonroi_pixels());
    plan.p_dr = split.p_dr;
    plan.p_dnr = split.p_dnr;
    EXPECT_LT(split.p_dr, prev_dr);
    EXPECT_GT(split.p_dnr, prev_dnr);
    prev_dr = split.p_dr;
    prev_dnr = split.p_dnr;
    const auto g = roiccast_gains(lambda, ell, a.mask, plan);
    double obj = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (a.mask[i]) obj += ell[i] * expected_distortion(g[i], 1e-3);
    }
    EXPECT_GT(obj, prev_obj);
    prev_obj = obj;
  }
}

TEST(EtaSweep, ViolationDetected) {
  std::vector<EtaRow> rows = {{0.1, {10.0, 20.0, 9.0}}, {0.2, {9.0, 19.0, 8.0}}};
  EXPECT_TRUE(eta_trend_violation(rows));
  rows[1].psnr.overall = 11.0;
  EXPECT_FALSE(eta_trend_violation(rows));
  rows[1].psnr.roi = 21.0;
  EXPECT_TRUE(eta_trend_violation(rows));
}

TEST(SnrSweep, RowsPerScheme) {
  auto cfg = base_config();
  cfg.snrs = {-5, 0, 5, 10};
  cfg.schemes = {Scheme::SoftCast, Scheme::RoicCast};
  const auto rows = run_snr_sweep(test::harbour_scene(1), cfg);
  ASSERT_EQ(rows.size(), 8u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].snr_db, cfg.snrs[i / 2]);
    EXPECT_EQ(rows[i].scheme, cfg.schemes[i % 2]);
  }
}

class FadingTrace : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    seq_ = new SyntheticSequence(make_harbour_sequence(101));
  }
  static void TearDownTestSuite() {
    delete seq_;
    seq_ = nullptr;
  }
  static SceneSource source() {
    std::map<int, LumaFrame> frames;
    for (int i = 1; i <= 100; ++i) frames.emplace(i, seq_->frames[i]);
    return SceneSource(seq_->frames[0], frames, seq_->rois);
  }
  static ExperimentConfig config(bool whitening) {
    ExperimentConfig cfg;
    cfg.channel = ChannelKind::Rayleigh;
    cfg.snr_db = 10.0;
    cfg.eta = 0.5;
    cfg.whitening = whitening;
    cfg.seed = 3;
    for (int i = 1; i <= 100; ++i) cfg.frames.push_back(i);
    return cfg;
  }
  static inline SyntheticSequence* seq_ = nullptr;
};

TEST_F(FadingTrace, Deterministic) {
  const auto src = source();
  auto cfg = config(true);
  cfg.frames.resize(5);
  const auto a = run_fading_trace(src, cfg);
  const auto b = run_fading_trace(src, cfg);
  ASSERT_EQ(a.size(), 5u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].packet_snr_db, b[i].packet_snr_db);
    EXPECT_EQ(a[i].psnr.overall, b[i].psnr.overall);
    EXPECT_FALSE(a[i].packet_snr_db.empty());
  }
  cfg.channel = ChannelKind::Awgn;
  EXPECT_THROW(run_fading_trace(src, cfg), Error);
}

TEST_F(FadingTrace, WhiteningLowersPsnrVariance) {
  const auto src = source();
  std::vector<double> on, off;
  for (const auto& r : run_fading_trace(src, config(true))) on.push_back(r.psnr.overall);
  for (const auto& r : run_fading_trace(src, config(false))) off.push_back(r.psnr.overall);
  ASSERT_EQ(on.size(), 100u);
  EXPECT_LT(variance(on), variance(off));
}

TEST_F(FadingTrace, RoiAboveOverallEveryFrame) {
  const auto src = source();
  for (const auto& r : run_fading_trace(src, config(true))) {
    ASSERT_TRUE(r.psnr.roi.has_value());
    EXPECT_GE(*r.psnr.roi, r.psnr.overall) << "frame " << r.frame_index;
  }
}

TEST(Config, Validation) {
  ExperimentConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.eta = 1.5;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.eta = 0.5;
  cfg.sigma0_sq = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.sigma0_sq = 1e-3;
  cfg.packet_len = 0;
  EXPECT_THROW(cfg.validate(), Error);
  const auto text = describe(ExperimentConfig{});
  EXPECT_NE(text.find("# scheme=roiccast\n"), std::string::npos);
  EXPECT_NE(text.find("# snr_db=10\n"), std::string::npos);
}

TEST(Files, SceneSourceFromDisk) {
  test::TempDir dir;
  const auto seq = make_harbour_sequence(3);
  write_raw_frames(dir / "h.yuv", seq.frames, RawFormat::Yuv420);
  {
    std::ofstream out(dir / "h.csv");
    write_roi_csv(out, seq.rois);
  }
  ExperimentConfig cfg;
  cfg.video = dir / "h.yuv";
  cfg.roi_csv = dir / "h.csv";
  cfg.frame_index = 2;
  const auto r = run_frame(cfg, 2);
  cfg.video.clear();
  const auto mem = run_scene(Scene{seq.frames[2], seq.frames[0], rects_for(seq.rois, 2)}, cfg, 2);
  EXPECT_EQ(r.reconstructed, mem.reconstructed);
}
