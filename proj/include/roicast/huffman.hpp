#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <span>
#include <vector>

#include "roicast/bitstream.hpp"
#include "roicast/error.hpp"

namespace roicast {

inline constexpr int kHuffmanMaxLength = 63;

/// Canonical prefix code over byte symbols. A zero length means the symbol is unused.
struct HuffmanTable {
  std::array<std::uint8_t, 256> lengths{};
  std::array<std::uint64_t, 256> codes{};

  /// Number of length entries actually serialized (highest used symbol + 1).
  int span() const noexcept {
    for (int s = 255; s >= 0; --s) {
      if (lengths[s] != 0) return s + 1;
    }
    return 0;
  }

  void assign_canonical_codes() {
    std::vector<int> order;
    for (int s = 0; s < 256; ++s) {
      if (lengths[s] != 0) order.push_back(s);
    }
    std::sort(order.begin(), order.end(), [this](int a, int b) {
      return lengths[a] != lengths[b] ? lengths[a] < lengths[b] : a < b;
    });
    std::uint64_t code = 0;
    int prev_len = order.empty() ? 0 : lengths[order.front()];
    for (int s : order) {
      code <<= (lengths[s] - prev_len);
      prev_len = lengths[s];
      codes[s] = code++;
    }
  }
};

/// Code lengths from symbol frequencies. A single distinct symbol gets a 1-bit code.
inline HuffmanTable build_huffman_table(std::span<const std::uint8_t> symbols) {
  std::array<std::uint64_t, 256> freq{};
  for (auto s : symbols) ++freq[s];

  HuffmanTable table;
  struct Node {
    std::uint64_t weight;
    int id;  // < 256: leaf symbol; otherwise internal node
  };
  auto heavier = [](const Node& a, const Node& b) {
    return a.weight != b.weight ? a.weight > b.weight : a.id > b.id;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(heavier)> heap(heavier);
  std::vector<int> parent;
  for (int s = 0; s < 256; ++s) {
    if (freq[s] != 0) heap.push({freq[s], s});
  }
  if (heap.size() == 1) {
    table.lengths[heap.top().id] = 1;
    table.assign_canonical_codes();
    return table;
  }

  parent.assign(256, -1);
  int next_id = 256;
  while (heap.size() > 1) {
    const Node a = heap.top();
    heap.pop();
    const Node b = heap.top();
    heap.pop();
    parent.push_back(-1);
    parent[a.id] = next_id;
    parent[b.id] = next_id;
    heap.push({a.weight + b.weight, next_id});
    ++next_id;
  }
  for (int s = 0; s < 256; ++s) {
    if (freq[s] == 0) continue;
    int depth = 0;
    for (int n = s; parent[n] != -1; n = parent[n]) ++depth;
    if (depth > kHuffmanMaxLength) {
      throw Error(ErrorKind::Capacity, "huffman code length exceeds 63 bits");
    }
    table.lengths[s] = static_cast<std::uint8_t>(depth);
  }
  table.assign_canonical_codes();
  return table;
}

/// In-band layout, MSB first: u32 symbol count, u16 table span n, n x u8 code lengths, payload,
/// zero padding to a byte boundary.
struct HuffmanStream {
  std::vector<std::uint8_t> bytes;
  std::size_t bit_count = 0;      // header + table + payload, excluding final padding
  std::size_t payload_bits = 0;
  HuffmanTable table;
};

inline HuffmanStream huffman_encode(std::span<const std::uint8_t> symbols) {
  if (symbols.empty()) throw Error(ErrorKind::Validation, "cannot huffman-code an empty sequence");
  if (symbols.size() > 0xFFFFFFFFULL) throw Error(ErrorKind::Capacity, "too many symbols");

  HuffmanStream out;
  out.table = build_huffman_table(symbols);
  BitWriter w;
  w.put(symbols.size(), 32);
  const int span = out.table.span();
  w.put(static_cast<std::uint64_t>(span), 16);
  for (int s = 0; s < span; ++s) w.put(out.table.lengths[s], 8);
  const std::size_t header_bits = w.bit_count();
  for (auto s : symbols) w.put(out.table.codes[s], out.table.lengths[s]);
  out.bit_count = w.bit_count();
  out.payload_bits = out.bit_count - header_bits;
  out.bytes = w.take();
  return out;
}

inline std::vector<std::uint8_t> huffman_decode(std::span<const std::uint8_t> bytes) {
  BitReader r(bytes);
  const auto count = static_cast<std::size_t>(r.get(32));
  const int span = static_cast<int>(r.get(16));
  if (span > 256) throw Error(ErrorKind::CorruptStream, "huffman table span exceeds 256");

  HuffmanTable table;
  int max_len = 0;
  for (int s = 0; s < span; ++s) {
    table.lengths[s] = static_cast<std::uint8_t>(r.get(8));
    if (table.lengths[s] > kHuffmanMaxLength) {
      throw Error(ErrorKind::CorruptStream, "code length out of range");
    }
    max_len = std::max<int>(max_len, table.lengths[s]);
  }
  if (count == 0) return {};
  if (max_len == 0) throw Error(ErrorKind::CorruptStream, "empty code table");

  // Kraft check in units of 2^-max_len.
  long double kraft = 0.0L;
  for (int s = 0; s < span; ++s) {
    if (table.lengths[s] != 0) kraft += std::ldexp(1.0L, -table.lengths[s]);
  }
  if (kraft > 1.0L + 1e-15L) throw Error(ErrorKind::CorruptStream, "code lengths oversubscribed");
  table.assign_canonical_codes();

  // first_code[len], first_index[len] over symbols sorted canonically.
  std::vector<int> sorted;
  for (int s = 0; s < span; ++s) {
    if (table.lengths[s] != 0) sorted.push_back(s);
  }
  std::sort(sorted.begin(), sorted.end(), [&table](int a, int b) {
    return table.lengths[a] != table.lengths[b] ? table.lengths[a] < table.lengths[b] : a < b;
  });
  std::vector<std::uint64_t> first_code(max_len + 1, 0);
  std::vector<int> first_index(max_len + 1, 0);
  std::vector<int> len_count(max_len + 1, 0);
  for (int s : sorted) ++len_count[table.lengths[s]];
  {
    int index = 0;
    for (int len = 1; len <= max_len; ++len) {
      first_index[len] = index;
      index += len_count[len];
    }
    for (int len = 1; len <= max_len; ++len) {
      if (len_count[len] != 0) first_code[len] = table.codes[sorted[first_index[len]]];
    }
  }

  std::vector<std::uint8_t> out;
  out.reserve(count);
  while (out.size() < count) {
    std::uint64_t code = 0;
    int len = 0;
    bool matched = false;
    while (len < max_len) {
      code = (code << 1) | (r.get_bit() ? 1U : 0U);
      ++len;
      if (len_count[len] != 0 && code >= first_code[len] &&
          code - first_code[len] < static_cast<std::uint64_t>(len_count[len])) {
        out.push_back(static_cast<std::uint8_t>(sorted[first_index[len] + (code - first_code[len])]));
        matched = true;
        break;
      }
    }
    if (!matched) throw Error(ErrorKind::CorruptStream, "invalid huffman code");
  }
  return out;
}

}  // namespace roicast
