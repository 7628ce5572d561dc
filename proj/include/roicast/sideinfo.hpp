#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "roicast/error.hpp"
#include "roicast/huffman.hpp"
#include "roicast/media_io.hpp"
#include "roicast/roi_coding.hpp"

namespace roicast {

// ---------------------------------------------------------------------------------------------
// Quantization of per-block statistics
// ---------------------------------------------------------------------------------------------

inline constexpr double kLogPowerMin = -6.0;
inline constexpr double kLogPowerMax = 6.0;
inline constexpr double kLogPowerStep = (kLogPowerMax - kLogPowerMin) / 256.0;
inline constexpr double kCorrStep = 1.0 / 255.0;

/// 256 uniform bins over log10(lambda) in [-6, 6]; a value on a bin edge falls in the upper bin.
inline std::uint8_t quantize_lambda(double lambda) {
  const double v = std::log10(std::max(lambda, 0.0) + 1e-12);
  const double bin = std::floor((v - kLogPowerMin) / kLogPowerStep);
  return static_cast<std::uint8_t>(std::clamp(bin, 0.0, 255.0));
}

inline double dequantize_lambda(std::uint8_t code) {
  return std::pow(10.0, kLogPowerMin + (code + 0.5) * kLogPowerStep);
}

/// Bins of width 1/255 starting at 0; the top code is reserved for k == 1 exactly.
inline std::uint8_t quantize_k(double k) {
  const double bin = std::floor(std::clamp(k, 0.0, 1.0) / kCorrStep);
  return static_cast<std::uint8_t>(std::clamp(bin, 0.0, 255.0));
}

inline double dequantize_k(std::uint8_t code) { return std::min(1.0, (code + 0.5) * kCorrStep); }

// ---------------------------------------------------------------------------------------------
// Modulation and coding schemes
// ---------------------------------------------------------------------------------------------

struct McsEntry {
  double beta_db = 0.0;
  int cqi = 0;
  int modulation_order = 2;  // bits per symbol
  double ecr = 1.0;

  double beta_linear() const { return std::pow(10.0, beta_db / 10.0); }
  double bits_per_symbol() const { return modulation_order * ecr; }

  friend bool operator==(const McsEntry&, const McsEntry&) = default;
};

using McsTable = std::vector<McsEntry>;

/// LTE rows meeting a 1e-3 BLER target.
inline const McsTable& default_mcs_table() {
  static const McsTable table = {
      {-5.0, 1, 2, 0.0762}, {0.0, 4, 2, 0.3008},  {5.0, 7, 4, 0.3691},
      {10.0, 9, 4, 0.6016}, {15.0, 12, 6, 0.6504}, {20.0, 15, 6, 0.9258},
  };
  return table;
}

inline void validate_mcs_table(const McsTable& table) {
  if (table.empty()) throw Error(ErrorKind::Validation, "MCS table is empty");
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& e = table[i];
    if (e.modulation_order <= 0 || !(e.ecr > 0.0 && e.ecr <= 1.0)) {
      throw Error(ErrorKind::Validation, "MCS row " + std::to_string(i) + " has invalid rate");
    }
    if (i > 0 && (e.beta_db <= table[i - 1].beta_db || e.cqi <= table[i - 1].cqi)) {
      throw Error(ErrorKind::Validation, "MCS rows must increase in beta and CQI");
    }
  }
}

/// Parses `beta_db,cqi,modulation,ecr` rows. Modulation is `4QAM`/`16QAM`/`64QAM` or bits/symbol.
inline McsTable parse_mcs_table(std::istream& in) {
  McsTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::vector<std::string> f;
    std::stringstream ss(body);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(detail::trim(field));
    McsEntry e;
    try {
      if (f.size() != 4) throw std::invalid_argument("field count");
      e.beta_db = std::stod(f[0]);
      e.cqi = std::stoi(f[1]);
      std::string mod = f[2];
      std::transform(mod.begin(), mod.end(), mod.begin(), ::toupper);
      if (mod == "4QAM" || mod == "QPSK") e.modulation_order = 2;
      else if (mod == "16QAM") e.modulation_order = 4;
      else if (mod == "64QAM") e.modulation_order = 6;
      else if (mod == "256QAM") e.modulation_order = 8;
      else e.modulation_order = std::stoi(mod);
      e.ecr = std::stod(f[3]);
    } catch (const std::exception&) {
      throw Error(ErrorKind::Parse, "MCS table line " + std::to_string(line_no) + ": \"" + body + "\"");
    }
    table.push_back(e);
  }
  validate_mcs_table(table);
  return table;
}

inline McsTable load_mcs_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return parse_mcs_table(in);
}

/// Highest row whose threshold the channel meets; below the table, the most robust row.
inline McsEntry select_mcs(double channel_snr_db, const McsTable& table = default_mcs_table()) {
  if (table.empty()) throw Error(ErrorKind::Validation, "MCS table is empty");
  McsEntry chosen = table.front();
  for (const auto& e : table) {
    if (e.beta_db <= channel_snr_db) chosen = e;
  }
  return chosen;
}

/// Per-symbol power of the digital side channel.
inline double sideinfo_power(const McsEntry& mcs, double sigma0_sq) {
  return mcs.beta_linear() * sigma0_sq;
}

inline std::size_t sideinfo_symbols(std::size_t bit_count, const McsEntry& mcs) {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(bit_count) / mcs.bits_per_symbol()));
}

// ---------------------------------------------------------------------------------------------
// Packet
// ---------------------------------------------------------------------------------------------

/// Everything the receiver needs besides the analog stream.
struct SideInfo {
  int n_blocks = 0;
  std::vector<RoiSpan> spans;
  std::vector<std::uint8_t> lambda_codes;
  std::vector<std::uint8_t> k_codes;

  friend bool operator==(const SideInfo&, const SideInfo&) = default;
};

struct SideInfoPacket {
  std::vector<std::uint8_t> bitstream;
  std::size_t bit_count = 0;
  McsEntry mcs;
  std::size_t symbol_count = 0;
  double p_s = 0.0;  // per-symbol power
};

/// Raw byte layout before entropy coding, all fields big-endian:
/// u16 n_blocks, u16 span count, span count x (u16 start, u16 end), n_blocks lambda codes,
/// n_blocks k codes.
inline std::vector<std::uint8_t> serialize_sideinfo(const SideInfo& info) {
  constexpr int kLimit = 1 << 16;
  if (info.n_blocks < 0 || info.n_blocks >= kLimit) {
    throw Error(ErrorKind::Capacity, "block count " + std::to_string(info.n_blocks) +
                                         " does not fit in 16 bits");
  }
  if (info.spans.size() >= static_cast<std::size_t>(kLimit)) {
    throw Error(ErrorKind::Capacity, "too many ROI spans");
  }
  if (info.lambda_codes.size() != static_cast<std::size_t>(info.n_blocks) ||
      info.k_codes.size() != static_cast<std::size_t>(info.n_blocks)) {
    throw Error(ErrorKind::Validation, "side-info code vectors must hold one entry per block");
  }
  std::vector<std::uint8_t> out;
  out.reserve(4 + 4 * info.spans.size() + 2 * info.lambda_codes.size());
  auto put16 = [&out](int v) {
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  };
  put16(info.n_blocks);
  put16(static_cast<int>(info.spans.size()));
  for (const auto& s : info.spans) {
    if (s.start < 0 || s.end < 0 || s.start >= kLimit || s.end >= kLimit) {
      throw Error(ErrorKind::Capacity, "span index does not fit in 16 bits");
    }
    put16(s.start);
    put16(s.end);
  }
  out.insert(out.end(), info.lambda_codes.begin(), info.lambda_codes.end());
  out.insert(out.end(), info.k_codes.begin(), info.k_codes.end());
  return out;
}

inline SideInfo deserialize_sideinfo(std::span<const std::uint8_t> raw) {
  std::size_t pos = 0;
  auto get16 = [&]() {
    if (pos + 2 > raw.size()) throw Error(ErrorKind::CorruptStream, "side info truncated");
    const int v = (raw[pos] << 8) | raw[pos + 1];
    pos += 2;
    return v;
  };
  SideInfo info;
  info.n_blocks = get16();
  const int span_count = get16();
  for (int i = 0; i < span_count; ++i) {
    const int start = get16();
    const int end = get16();
    info.spans.push_back({start, end});
  }
  const auto n = static_cast<std::size_t>(info.n_blocks);
  if (raw.size() - pos != 2 * n) {
    throw Error(ErrorKind::CorruptStream, "side info length does not match block count");
  }
  info.lambda_codes.assign(raw.begin() + static_cast<std::ptrdiff_t>(pos),
                           raw.begin() + static_cast<std::ptrdiff_t>(pos + n));
  info.k_codes.assign(raw.begin() + static_cast<std::ptrdiff_t>(pos + n), raw.end());
  // Validates ordering and range.
  (void)rlc_decode(info.spans, n);
  return info;
}

inline SideInfoPacket build_packet(const SideInfo& info, const McsEntry& mcs, double sigma0_sq) {
  const auto raw = serialize_sideinfo(info);
  auto coded = huffman_encode(raw);
  SideInfoPacket packet;
  packet.bit_count = coded.bit_count;
  packet.bitstream = std::move(coded.bytes);
  packet.mcs = mcs;
  packet.symbol_count = sideinfo_symbols(packet.bit_count, mcs);
  packet.p_s = sideinfo_power(mcs, sigma0_sq);
  return packet;
}

inline SideInfo parse_packet(const SideInfoPacket& packet) {
  return deserialize_sideinfo(huffman_decode(packet.bitstream));
}

}  // namespace roicast
