// Writes the synthetic harbour sequence as raw 4:2:0 (or luma-only) plus its ROI CSV.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "roicast/roicast.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic QCIF harbour fixture"};
  std::filesystem::path video = "harbour_qcif.yuv";
  std::filesystem::path roi = "harbour_qcif_roi.csv";
  int frames = 120;
  bool luma = false;
  app.add_option("--video", video, "output raw video")->capture_default_str();
  app.add_option("--roi", roi, "output ROI CSV")->capture_default_str();
  app.add_option("--frames", frames, "frame count")->check(CLI::Range(1, 300))->capture_default_str();
  app.add_flag("--luma", luma, "write luma-only frames instead of 4:2:0");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto seq = roicast::make_harbour_sequence(frames);
    roicast::write_raw_frames(video, seq.frames, luma ? roicast::RawFormat::LumaOnly : roicast::RawFormat::Yuv420);
    std::ofstream out(roi, std::ios::trunc);
    if (!out) throw roicast::Error(roicast::ErrorKind::Io, "cannot write " + roi.string());
    roicast::write_roi_csv(out, seq.rois);
  } catch (const roicast::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
