#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "roicast/error.hpp"

namespace roicast {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------------------------
// Hadamard whitening
// ---------------------------------------------------------------------------------------------

inline constexpr std::size_t kWhitenChunk = 64;

namespace detail {

// In-place orthonormal Walsh-Hadamard transform of one chunk (self-inverse).
inline void hadamard64(std::span<double, kWhitenChunk> v) {
  for (std::size_t len = 1; len < kWhitenChunk; len <<= 1) {
    for (std::size_t i = 0; i < kWhitenChunk; i += len << 1) {
      for (std::size_t j = i; j < i + len; ++j) {
        const double a = v[j];
        const double b = v[j + len];
        v[j] = a + b;
        v[j + len] = a - b;
      }
    }
  }
  for (auto& x : v) x *= 0.125;
}

}  // namespace detail

struct Whitened {
  std::vector<double> values;  // multiple of 64
  std::size_t pad = 0;
};

inline Whitened whiten(std::span<const double> values) {
  Whitened out;
  out.pad = (kWhitenChunk - values.size() % kWhitenChunk) % kWhitenChunk;
  out.values.assign(values.begin(), values.end());
  out.values.resize(values.size() + out.pad, 0.0);
  for (std::size_t off = 0; off < out.values.size(); off += kWhitenChunk) {
    detail::hadamard64(std::span<double, kWhitenChunk>(out.values.data() + off, kWhitenChunk));
  }
  return out;
}

inline std::vector<double> dewhiten(std::span<const double> values, std::size_t pad) {
  if (values.size() % kWhitenChunk != 0 || pad > values.size()) {
    throw Error(ErrorKind::Validation, "whitened stream is not chunk aligned");
  }
  std::vector<double> out(values.begin(), values.end());
  for (std::size_t off = 0; off < out.size(); off += kWhitenChunk) {
    detail::hadamard64(std::span<double, kWhitenChunk>(out.data() + off, kWhitenChunk));
  }
  out.resize(out.size() - pad);
  return out;
}

/// Spreads each 64-value chunk across the whole sequence: value j of chunk c moves to
/// position j * chunks + c.
inline std::vector<double> interleave_chunks(std::span<const double> values) {
  if (values.size() % kWhitenChunk != 0) throw Error(ErrorKind::Validation, "length must be a multiple of 64");
  const std::size_t chunks = values.size() / kWhitenChunk;
  std::vector<double> out(values.size());
  for (std::size_t c = 0; c < chunks; ++c) {
    for (std::size_t j = 0; j < kWhitenChunk; ++j) out[j * chunks + c] = values[c * kWhitenChunk + j];
  }
  return out;
}

inline std::vector<double> deinterleave_chunks(std::span<const double> values) {
  if (values.size() % kWhitenChunk != 0) throw Error(ErrorKind::Validation, "length must be a multiple of 64");
  const std::size_t chunks = values.size() / kWhitenChunk;
  std::vector<double> out(values.size());
  for (std::size_t c = 0; c < chunks; ++c) {
    for (std::size_t j = 0; j < kWhitenChunk; ++j) out[c * kWhitenChunk + j] = values[j * chunks + c];
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// I/Q mapping
// ---------------------------------------------------------------------------------------------

struct IqPacked {
  std::vector<Complex> symbols;
  std::size_t pad = 0;  // 1 when the input length was odd
};

inline IqPacked iq_pack(std::span<const double> values) {
  IqPacked out;
  out.pad = values.size() % 2;
  out.symbols.reserve((values.size() + 1) / 2);
  for (std::size_t i = 0; i < values.size(); i += 2) {
    out.symbols.emplace_back(values[i], i + 1 < values.size() ? values[i + 1] : 0.0);
  }
  return out;
}

inline std::vector<double> iq_unpack(std::span<const Complex> symbols, std::size_t pad) {
  if (pad > 1 || (pad == 1 && symbols.empty())) throw Error(ErrorKind::Validation, "bad I/Q pad");
  std::vector<double> out;
  out.reserve(symbols.size() * 2);
  for (const auto& s : symbols) {
    out.push_back(s.real());
    out.push_back(s.imag());
  }
  out.resize(out.size() - pad);
  return out;
}

// ---------------------------------------------------------------------------------------------
// OFDM framing: 64 subcarriers, 48 data, 4 unit pilots, 12 nulls, unitary transform
// ---------------------------------------------------------------------------------------------

inline constexpr std::size_t kOfdmSize = 64;
inline constexpr std::size_t kOfdmDataCarriers = 48;
inline constexpr std::array<std::size_t, 4> kPilotCarriers = {7, 21, 43, 57};

using OfdmBlock = std::array<Complex, kOfdmSize>;

inline const std::array<std::size_t, kOfdmDataCarriers>& ofdm_data_carriers() {
  static const auto carriers = [] {
    std::array<std::size_t, kOfdmDataCarriers> c{};
    std::size_t n = 0;
    auto take = [&](std::size_t lo, std::size_t hi) {
      for (std::size_t k = lo; k <= hi; ++k) {
        if (k != 7 && k != 21 && k != 43 && k != 57) c[n++] = k;
      }
    };
    take(1, 26);
    take(38, 63);
    return c;
  }();
  return carriers;
}

namespace detail {

// Unitary radix-2 DFT of size 64; sign = +1 for the inverse direction.
inline void fft64(OfdmBlock& a, int sign) {
  for (std::size_t i = 1, j = 0; i < kOfdmSize; ++i) {
    std::size_t bit = kOfdmSize >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= kOfdmSize; len <<= 1) {
    const double angle = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    for (std::size_t i = 0; i < kOfdmSize; i += len) {
      for (std::size_t j = 0; j < len / 2; ++j) {
        const Complex w = std::polar(1.0, angle * static_cast<double>(j));
        const Complex u = a[i + j];
        const Complex v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
      }
    }
  }
  for (auto& x : a) x *= 0.125;  // 1/sqrt(64)
}

}  // namespace detail

/// Maps symbols onto data subcarriers, 48 per block (last block zero-filled), and returns the
/// time-domain blocks.
inline std::vector<OfdmBlock> ofdm_frame(std::span<const Complex> symbols) {
  const auto& data = ofdm_data_carriers();
  const std::size_t n_blocks = (symbols.size() + kOfdmDataCarriers - 1) / kOfdmDataCarriers;
  std::vector<OfdmBlock> out(n_blocks);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    OfdmBlock freq{};
    for (std::size_t p : kPilotCarriers) freq[p] = Complex(1.0, 0.0);
    for (std::size_t k = 0; k < kOfdmDataCarriers; ++k) {
      const std::size_t idx = b * kOfdmDataCarriers + k;
      if (idx < symbols.size()) freq[data[k]] = symbols[idx];
    }
    detail::fft64(freq, +1);
    out[b] = freq;
  }
  return out;
}

inline std::vector<Complex> ofdm_deframe(std::span<const OfdmBlock> blocks, std::size_t n_symbols) {
  const auto& data = ofdm_data_carriers();
  if (n_symbols > blocks.size() * kOfdmDataCarriers) {
    throw Error(ErrorKind::Integrity, "not enough OFDM blocks for requested symbols");
  }
  std::vector<Complex> out;
  out.reserve(n_symbols);
  for (const auto& block : blocks) {
    OfdmBlock freq = block;
    detail::fft64(freq, -1);
    for (std::size_t k = 0; k < kOfdmDataCarriers && out.size() < n_symbols; ++k) {
      out.push_back(freq[data[k]]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// Channel simulation
// ---------------------------------------------------------------------------------------------

enum class ChannelKind { Awgn, Rayleigh };

inline ChannelKind parse_channel_kind(const std::string& name) {
  if (name == "awgn") return ChannelKind::Awgn;
  if (name == "rayleigh") return ChannelKind::Rayleigh;
  throw Error(ErrorKind::Parse, "unknown channel kind \"" + name + "\"");
}

inline const char* to_string(ChannelKind kind) {
  return kind == ChannelKind::Awgn ? "awgn" : "rayleigh";
}

struct ChannelConfig {
  ChannelKind kind = ChannelKind::Awgn;
  double sigma0_sq = 1e-3;        // complex noise variance per symbol
  std::size_t packet_len = 48;    // symbols sharing one fading coefficient
  std::uint64_t seed = 1;
  bool whitening = false;
  double mean_snr_db = 0.0;       // only used to label the per-packet SNR trace

  void validate() const {
    if (!(sigma0_sq > 0.0)) throw Error(ErrorKind::Validation, "noise variance must be positive");
    if (packet_len < 1) throw Error(ErrorKind::Validation, "packet length must be at least 1");
  }
};

/// Received symbols plus what the (ideal) estimator knows about the channel.
struct SymbolStream {
  std::vector<Complex> symbols;
  std::vector<Complex> fading;   // one entry per packet; all 1 for AWGN
  std::vector<double> snr_db;    // realized per-packet SNR
  std::size_t sideinfo_symbols = 0;

  std::size_t total_symbols() const noexcept { return symbols.size() + sideinfo_symbols; }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t frame, std::uint64_t packet) {
  return splitmix64(splitmix64(splitmix64(seed) ^ frame) ^ packet);
}

}  // namespace detail

/// r = h s + n per packet. n is circular complex Gaussian with total variance sigma0_sq
/// (sigma0_sq / 2 per real dimension); h is CN(0, 1) for Rayleigh and 1 for AWGN.
/// Each packet draws from its own generator keyed by (seed, frame, packet).
inline SymbolStream transmit(std::span<const Complex> symbols, const ChannelConfig& config,
                             std::uint64_t frame_index = 0) {
  config.validate();
  SymbolStream out;
  out.symbols.resize(symbols.size());
  const double noise_sd = std::sqrt(config.sigma0_sq / 2.0);
  const std::size_t packets = (symbols.size() + config.packet_len - 1) / config.packet_len;
  out.fading.reserve(packets);
  out.snr_db.reserve(packets);
  for (std::size_t p = 0; p < packets; ++p) {
    std::mt19937_64 rng(detail::derive_seed(config.seed, frame_index, p));
    std::normal_distribution<double> normal(0.0, 1.0);
    Complex h(1.0, 0.0);
    if (config.kind == ChannelKind::Rayleigh) {
      const double a = normal(rng);
      const double b = normal(rng);
      h = Complex(a, b) / std::sqrt(2.0);
    }
    out.fading.push_back(h);
    out.snr_db.push_back(config.mean_snr_db + 10.0 * std::log10(std::norm(h)));
    const std::size_t lo = p * config.packet_len;
    const std::size_t hi = std::min(symbols.size(), lo + config.packet_len);
    for (std::size_t i = lo; i < hi; ++i) {
      const double nr = normal(rng) * noise_sd;
      const double ni = normal(rng) * noise_sd;
      out.symbols[i] = h * symbols[i] + Complex(nr, ni);
    }
  }
  return out;
}

/// Zero-forcing equalization with perfect channel knowledge.
inline std::vector<Complex> equalize(const SymbolStream& received, std::size_t packet_len) {
  std::vector<Complex> out(received.symbols.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Complex h = received.fading[i / packet_len];
    out[i] = received.symbols[i] / h;
  }
  return out;
}

}  // namespace roicast
