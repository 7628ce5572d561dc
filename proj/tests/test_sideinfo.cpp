#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "test_util.hpp"

using namespace roicast;

TEST(BitStream, MsbFirstRoundTrip) {
  BitWriter w;
  w.put(0b101, 3);
  w.put(0xABCD, 16);
  w.put_bit(true);
  EXPECT_EQ(w.bit_count(), 20u);
  const auto bytes = w.bytes();
  ASSERT_EQ(bytes.size(), 3u);
  EXPECT_EQ(bytes[0], 0b10110101);
  BitReader r(bytes);
  EXPECT_EQ(r.get(3), 0b101u);
  EXPECT_EQ(r.get(16), 0xABCDu);
  EXPECT_TRUE(r.get_bit());
  r.get(4);
  EXPECT_THROW(r.get_bit(), Error);
}

TEST(Quantizer, CorrelationExamples) {
  EXPECT_EQ(quantize_k(0.0), 0);
  EXPECT_DOUBLE_EQ(dequantize_k(0), 1.0 / 510.0);
  EXPECT_EQ(quantize_k(1.0), 255);
  EXPECT_LE(dequantize_k(255), 1.0);
  for (int c = 0; c < 256; ++c) {
    EXPECT_EQ(quantize_k(dequantize_k(static_cast<std::uint8_t>(c))), c);
  }
}

TEST(Quantizer, PowerExamples) {
  EXPECT_EQ(quantize_lambda(1.0), 128);
  EXPECT_EQ(quantize_lambda(0.0), 0);
  EXPECT_EQ(quantize_lambda(1e9), 255);
  for (int c = 0; c < 256; ++c) {
    EXPECT_EQ(quantize_lambda(dequantize_lambda(static_cast<std::uint8_t>(c))), c);
  }
}

TEST(Quantizer, PowerErrorWithinHalfBin) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> exponent(-6.0, 6.0);
  const double half_bin = 12.0 / 256.0 / 2.0;
  double worst = 0.0;
  for (int t = 0; t < 100000; ++t) {
    const double lambda = std::pow(10.0, exponent(rng));
    const double err = std::abs(std::log10(dequantize_lambda(quantize_lambda(lambda))) - std::log10(lambda));
    worst = std::max(worst, err);
  }
  EXPECT_LE(worst, half_bin + 1e-9);
  EXPECT_GT(worst, 0.9 * half_bin);
}

TEST(Huffman, TwoSymbolAlphabet) {
  const std::vector<std::uint8_t> s = {'a', 'a', 'a', 'b'};
  const auto enc = huffman_encode(s);
  EXPECT_EQ(enc.table.lengths['a'], 1);
  EXPECT_EQ(enc.table.lengths['b'], 1);
  EXPECT_LE(enc.payload_bits, 4u);
  EXPECT_EQ(huffman_decode(enc.bytes), s);
}

TEST(Huffman, SingleSymbol) {
  const std::vector<std::uint8_t> s(17, 42);
  const auto enc = huffman_encode(s);
  EXPECT_EQ(enc.table.lengths[42], 1);
  EXPECT_EQ(enc.payload_bits, 17u);
  EXPECT_EQ(huffman_decode(enc.bytes), s);
}

TEST(Huffman, UniformAlphabetNearEightBits) {
  std::vector<std::uint8_t> s(256);
  for (int i = 0; i < 256; ++i) s[i] = static_cast<std::uint8_t>(i);
  const auto enc = huffman_encode(s);
  const double avg = static_cast<double>(enc.payload_bits) / 256.0;
  EXPECT_NEAR(avg, 8.0, 1.0);
  EXPECT_EQ(huffman_decode(enc.bytes), s);
}

TEST(Huffman, SkewedSourceBeatsFixedLength) {
  std::mt19937_64 rng(14);
  std::geometric_distribution<int> geo(0.3);
  std::vector<std::uint8_t> s(5000);
  std::array<double, 256> freq{};
  for (auto& v : s) {
    v = static_cast<std::uint8_t>(std::min(geo(rng), 255));
    freq[v] += 1.0;
  }
  double entropy = 0.0;
  for (double f : freq) {
    if (f > 0) entropy -= f / s.size() * std::log2(f / s.size());
  }
  const auto enc = huffman_encode(s);
  const double avg = static_cast<double>(enc.payload_bits) / s.size();
  EXPECT_GE(avg, entropy - 1e-9);
  EXPECT_LT(avg, entropy + 1.0);
}

TEST(Huffman, EmptyInputAndCorruption) {
  EXPECT_THROW(huffman_encode(std::vector<std::uint8_t>{}), Error);
  const std::vector<std::uint8_t> s = {1, 2, 3, 3, 3, 4};
  auto bytes = huffman_encode(s).bytes;
  auto truncated = bytes;
  truncated.resize(truncated.size() - 1);
  EXPECT_THROW(huffman_decode(truncated), Error);
  EXPECT_THROW(huffman_decode(std::vector<std::uint8_t>{0, 0}), Error);
  // Zero every code length: no valid code.
  auto no_codes = bytes;
  for (std::size_t i = 6; i < 6 + 5; ++i) no_codes[i] = 0;
  EXPECT_THROW(huffman_decode(no_codes), Error);
}

TEST(Huffman, RandomRoundTrip) {
  std::mt19937_64 rng(15);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng() % 600;
    const int alphabet = 1 + static_cast<int>(rng() % 256);
    std::vector<std::uint8_t> s(n);
    for (auto& v : s) v = static_cast<std::uint8_t>(rng() % alphabet);
    ASSERT_EQ(huffman_decode(huffman_encode(s).bytes), s);
  }
}

TEST(Mcs, TableRowsAndFloorRule) {
  const auto& t = default_mcs_table();
  ASSERT_EQ(t.size(), 6u);
  for (const auto& row : t) EXPECT_EQ(select_mcs(row.beta_db), row);
  const auto ten = select_mcs(10.0);
  EXPECT_EQ(ten.cqi, 9);
  EXPECT_EQ(ten.modulation_order, 4);
  EXPECT_DOUBLE_EQ(ten.ecr, 0.6016);
  const auto seven = select_mcs(7.0);
  EXPECT_EQ(seven.cqi, 7);
  EXPECT_DOUBLE_EQ(seven.ecr, 0.3691);
  const auto low = select_mcs(-20.0);
  EXPECT_EQ(low.cqi, 1);
  EXPECT_EQ(low.modulation_order, 2);
  EXPECT_DOUBLE_EQ(low.ecr, 0.0762);
  EXPECT_EQ(select_mcs(40.0).cqi, 15);
}

TEST(Mcs, ParseTable) {
  std::istringstream in("# beta,cqi,mod,ecr\n-5,1,4QAM,0.0762\n3, 5, 16qam, 0.5\n");
  const auto t = parse_mcs_table(in);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[1].modulation_order, 4);
  EXPECT_EQ(select_mcs(4.0, t).cqi, 5);
  std::istringstream bad("1,2,3\n");
  EXPECT_THROW(parse_mcs_table(bad), Error);
  std::istringstream unsorted("5,7,16QAM,0.3\n0,4,4QAM,0.3\n");
  EXPECT_THROW(parse_mcs_table(unsorted), Error);
}

TEST(SideChannel, PowerAndSymbols) {
  McsEntry ten{10.0, 9, 4, 0.6016};
  EXPECT_NEAR(sideinfo_power(ten, 1e-3), 0.01, 1e-15);
  const auto cqi7 = select_mcs(5.0);
  EXPECT_EQ(sideinfo_symbols(1200, cqi7), 813u);
  double prev = 0.0;
  for (const auto& row : default_mcs_table()) {
    const double p = sideinfo_power(row, 1e-3);
    EXPECT_GE(p, prev);
    prev = p;
  }
}

TEST(SideInfoPacket, EmptySpansDecodeToNonRoi) {
  SideInfo info;
  info.n_blocks = 396;
  info.lambda_codes.assign(396, 100);
  info.k_codes.assign(396, 200);
  const auto packet = build_packet(info, select_mcs(10.0), 1e-3);
  const auto parsed = parse_packet(packet);
  EXPECT_EQ(parsed, info);
  EXPECT_EQ(rlc_decode(parsed.spans, 396).roi_blocks(), 0u);
}

TEST(SideInfoPacket, SerializationOrder) {
  SideInfo info;
  info.n_blocks = 3;
  info.spans = {{1, 2}};
  info.lambda_codes = {10, 11, 12};
  info.k_codes = {20, 21, 22};
  const std::vector<std::uint8_t> expected = {0, 3, 0, 1, 0, 1, 0, 2, 10, 11, 12, 20, 21, 22};
  EXPECT_EQ(serialize_sideinfo(info), expected);
  info.spans = {{1, 70000}};
  EXPECT_THROW(serialize_sideinfo(info), Error);
}

TEST(SideInfoPacket, RandomRoundTrip) {
  std::mt19937_64 rng(16);
  const auto& table = default_mcs_table();
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng() % 400;
    RoiMask m(n);
    std::bernoulli_distribution bit((rng() % 100) / 100.0);
    for (std::size_t i = 0; i < n; ++i) m.set(i, bit(rng));
    SideInfo info;
    info.n_blocks = static_cast<int>(n);
    info.spans = rlc_encode(m);
    for (std::size_t i = 0; i < n; ++i) {
      info.lambda_codes.push_back(static_cast<std::uint8_t>(rng() % 256));
      info.k_codes.push_back(static_cast<std::uint8_t>(rng() % 256));
    }
    const auto& mcs = table[rng() % table.size()];
    const auto packet = build_packet(info, mcs, 1e-3);
    ASSERT_EQ(parse_packet(packet), info);
    ASSERT_EQ(packet.symbol_count,
              static_cast<std::size_t>(std::ceil(packet.bit_count / (mcs.modulation_order * mcs.ecr))));
  }
}
