#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "core/binio.hpp"

namespace cluedex {

// Plain bit vector with a rank directory: one cumulative popcount per
// 512-bit block, in-block counting by word popcounts. Build once via set()
// then finish(); queries are read-only afterwards.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::uint64_t n) : n_(n), words_((n + 63) / 64, 0) {}

  void set(std::uint64_t i) { words_[i >> 6] |= std::uint64_t(1) << (i & 63); }

  void finish();

  bool get(std::uint64_t i) const {
    return (words_[i >> 6] >> (i & 63)) & 1;
  }

  // Number of set bits in [0, i).
  std::uint64_t rank1(std::uint64_t i) const {
    std::uint64_t word = i >> 6;
    std::uint64_t r = blocks_[i >> 9];
    for (std::uint64_t w = (i >> 9) << 3; w < word; ++w) {
      r += static_cast<std::uint64_t>(std::popcount(words_[w]));
    }
    std::uint64_t tail = i & 63;
    if (tail) {
      r += static_cast<std::uint64_t>(
          std::popcount(words_[word] & ((std::uint64_t(1) << tail) - 1)));
    }
    return r;
  }

  std::uint64_t rank0(std::uint64_t i) const { return i - rank1(i); }

  std::uint64_t size() const { return n_; }
  std::uint64_t ones() const { return n_ ? rank1(n_) : 0; }

  void save(BinaryWriter& w) const;
  static BitVector load(BinaryReader& r);

 private:
  std::uint64_t n_ = 0;
  std::vector<std::uint64_t> words_;
  std::vector<std::uint64_t> blocks_;  // cumulative ones before each 8-word block
};

}  // namespace cluedex
