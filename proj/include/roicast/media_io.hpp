#pragma once

#include <cctype>
#include <cerrno>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "roicast/error.hpp"

namespace roicast {

inline constexpr int kBlockSize = 8;
inline constexpr int kBlockCoeffs = kBlockSize * kBlockSize;

/// 8-bit luminance plane. Geometry is fixed at construction and always a multiple of the block size.
class LumaFrame {
 public:
  LumaFrame() = default;

  LumaFrame(int width, int height, std::vector<std::uint8_t> pixels)
      : width_(width), height_(height), pixels_(std::move(pixels)) {
    validate();
  }

  LumaFrame(int width, int height, std::uint8_t fill = 0)
      : LumaFrame(width, height, std::vector<std::uint8_t>(checked_area(width, height), fill)) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }
  bool empty() const noexcept { return pixels_.empty(); }

  std::uint8_t at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  std::uint8_t& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

  const std::vector<std::uint8_t>& pixels() const noexcept { return pixels_; }
  std::vector<std::uint8_t>& pixels() noexcept { return pixels_; }

  bool same_geometry(const LumaFrame& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const LumaFrame&, const LumaFrame&) = default;

 private:
  static std::size_t checked_area(int width, int height) {
    if (width <= 0 || height <= 0) {
      throw Error(ErrorKind::Validation, "frame dimensions must be positive");
    }
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }

  void validate() const {
    const std::size_t area = checked_area(width_, height_);
    if (width_ % kBlockSize != 0 || height_ % kBlockSize != 0) {
      throw Error(ErrorKind::Validation, "frame " + std::to_string(width_) + "x" +
                                             std::to_string(height_) + " is not a multiple of " +
                                             std::to_string(kBlockSize));
    }
    if (pixels_.size() != area) {
      throw Error(ErrorKind::Validation, "pixel count does not match geometry");
    }
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Detector rectangle in corner form.
struct RoiRect {
  int frame_index = 0;
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool fits(int width, int height) const noexcept {
    return w > 0 && h > 0 && x >= 0 && y >= 0 && x + w <= width && y + h <= height;
  }

  friend bool operator==(const RoiRect&, const RoiRect&) = default;
};

using RoiTable = std::map<int, std::vector<RoiRect>>;

enum class RawFormat { Yuv420, LumaOnly };

inline std::size_t raw_frame_bytes(int width, int height, RawFormat format) {
  const std::size_t luma = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  return format == RawFormat::Yuv420 ? luma + 2 * ((luma + 3) / 4) : luma;
}

/// Number of complete frames in a raw file; a trailing partial frame is a truncation error.
inline std::size_t count_raw_frames(const std::filesystem::path& path, int width, int height,
                                    RawFormat format = RawFormat::Yuv420) {
  std::error_code ec;
  const auto bytes = std::filesystem::file_size(path, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot stat " + path.string() + ": " + ec.message());
  const std::size_t frame_bytes = raw_frame_bytes(width, height, format);
  if (bytes % frame_bytes != 0) {
    throw Error(ErrorKind::TruncatedInput, path.string() + " holds " + std::to_string(bytes) +
                                               " bytes, not a whole number of " +
                                               std::to_string(frame_bytes) + "-byte frames");
  }
  return bytes / frame_bytes;
}

/// Reads the luma plane of each requested frame, in request order.
inline std::vector<LumaFrame> load_yuv_frames(const std::filesystem::path& path, int width,
                                              int height, const std::vector<int>& indices,
                                              RawFormat format = RawFormat::Yuv420) {
  if (width % kBlockSize != 0 || height % kBlockSize != 0 || width <= 0 || height <= 0) {
    throw Error(ErrorKind::Validation, "frame geometry must be a positive multiple of 8");
  }
  const std::size_t frames = count_raw_frames(path, width, height, format);
  const std::size_t frame_bytes = raw_frame_bytes(width, height, format);
  const std::size_t luma = static_cast<std::size_t>(width) * height;

  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());

  std::vector<LumaFrame> out;
  out.reserve(indices.size());
  for (int index : indices) {
    if (index < 0 || static_cast<std::size_t>(index) >= frames) {
      throw Error(ErrorKind::Range, "frame index " + std::to_string(index) + " outside [0, " +
                                        std::to_string(frames) + ")");
    }
    std::vector<std::uint8_t> pixels(luma);
    in.seekg(static_cast<std::streamoff>(frame_bytes * static_cast<std::size_t>(index)));
    in.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(luma));
    if (in.gcount() != static_cast<std::streamsize>(luma)) {
      throw Error(ErrorKind::TruncatedInput, "short read at frame " + std::to_string(index));
    }
    out.emplace_back(width, height, std::move(pixels));
  }
  return out;
}

/// Writes frames as raw planar data; in 4:2:0 mode the chroma planes are neutral (128).
inline void write_raw_frames(const std::filesystem::path& path, const std::vector<LumaFrame>& frames,
                             RawFormat format = RawFormat::Yuv420) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  for (const auto& frame : frames) {
    out.write(reinterpret_cast<const char*>(frame.pixels().data()),
              static_cast<std::streamsize>(frame.size()));
    if (format == RawFormat::Yuv420) {
      const std::size_t chroma = raw_frame_bytes(frame.width(), frame.height(), format) - frame.size();
      const std::vector<char> neutral(chroma, static_cast<char>(128));
      out.write(neutral.data(), static_cast<std::streamsize>(neutral.size()));
    }
  }
  if (!out) throw Error(ErrorKind::Io, "write failed on " + path.string());
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline bool parse_int(const std::string& token, int& value) {
  const std::string t = trim(token);
  if (t.empty()) return false;
  std::size_t used = 0;
  try {
    value = std::stoi(t, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == t.size();
}

}  // namespace detail

/// Parses `frame,x,y,w,h` records. Blank lines and `#` comments are skipped.
/// When a geometry is given, every rect is validated against it.
inline RoiTable parse_roi_rects(std::istream& in, int width = 0, int height = 0) {
  RoiTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;

    std::vector<std::string> fields;
    std::stringstream ss(body);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);

    RoiRect rect;
    if (fields.size() != 5 || !detail::parse_int(fields[0], rect.frame_index) ||
        !detail::parse_int(fields[1], rect.x) || !detail::parse_int(fields[2], rect.y) ||
        !detail::parse_int(fields[3], rect.w) || !detail::parse_int(fields[4], rect.h)) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) +
                                        ": expected frame,x,y,w,h but got \"" + body + "\"");
    }
    if (rect.frame_index < 0 || rect.w <= 0 || rect.h <= 0 || rect.x < 0 || rect.y < 0) {
      throw Error(ErrorKind::Validation, "line " + std::to_string(line_no) + ": degenerate rect");
    }
    if (width > 0 && height > 0 && !rect.fits(width, height)) {
      throw Error(ErrorKind::Validation,
                  "line " + std::to_string(line_no) + ": rect exceeds " + std::to_string(width) +
                      "x" + std::to_string(height) + " frame");
    }
    table[rect.frame_index].push_back(rect);
  }
  return table;
}

inline RoiTable load_roi_rects(const std::filesystem::path& path, int width = 0, int height = 0) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return parse_roi_rects(in, width, height);
}

/// Frames absent from the table carry no ROI.
inline std::vector<RoiRect> rects_for(const RoiTable& table, int frame_index) {
  const auto it = table.find(frame_index);
  return it == table.end() ? std::vector<RoiRect>{} : it->second;
}

inline void write_frame_pgm(const LumaFrame& frame, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::Io, "cannot open " + path.string() + ": " + std::strerror(errno));
  }
  out << "P5\n" << frame.width() << ' ' << frame.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.pixels().data()),
            static_cast<std::streamsize>(frame.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed on " + path.string());
}

inline LumaFrame read_frame_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());

  auto next_token = [&in]() {
    std::string token;
    while (in) {
      const int c = in.get();
      if (c == EOF) break;
      if (c == '#') {
        std::string ignored;
        std::getline(in, ignored);
        continue;
      }
      if (std::isspace(c)) {
        if (!token.empty()) break;
        continue;
      }
      token.push_back(static_cast<char>(c));
    }
    return token;
  };

  int width = 0;
  int height = 0;
  int maxval = 0;
  if (next_token() != "P5" || !detail::parse_int(next_token(), width) ||
      !detail::parse_int(next_token(), height) || !detail::parse_int(next_token(), maxval) ||
      maxval != 255) {
    throw Error(ErrorKind::Parse, path.string() + " is not an 8-bit binary PGM");
  }
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * height);
  in.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(pixels.size())) {
    throw Error(ErrorKind::TruncatedInput, path.string() + " raster is short");
  }
  return LumaFrame(width, height, std::move(pixels));
}

}  // namespace roicast
