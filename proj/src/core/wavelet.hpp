#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "core/binio.hpp"
#include "core/bitvector.hpp"

namespace cluedex {

// Levelwise (concatenated) wavelet tree over symbols [0, sigma). Symbols
// use fixed-width codes (alphabet padded to a power of two), so every leaf
// sits at the same depth and node spans nest contiguously level by level.
class WaveletTree {
 public:
  WaveletTree() = default;

  static WaveletTree build(const std::vector<std::uint32_t>& seq, std::uint32_t sigma);

  std::uint32_t access(std::uint64_t i) const;

  // Occurrences of symbol a in [0, i).
  std::uint64_t rank(std::uint32_t a, std::uint64_t i) const;

  // Distinct symbols in [lo, hi) with their per-symbol rank bounds:
  // cb(a, rank(a, lo), rank(a, hi)), in increasing symbol order.
  void range_distinct(std::uint64_t lo, std::uint64_t hi,
                      const std::function<void(std::uint32_t, std::uint64_t, std::uint64_t)>& cb) const;

  // Number of distinct symbols in [lo, hi), stopping early once the count
  // reaches limit (returns limit in that case).
  std::uint64_t distinct_count(std::uint64_t lo, std::uint64_t hi, std::uint64_t limit) const;

  // Any one symbol occurring in [lo, hi).
  std::uint32_t any_symbol(std::uint64_t lo, std::uint64_t hi) const;

  std::uint64_t size() const { return n_; }
  std::uint32_t sigma() const { return sigma_; }

  void save(BinaryWriter& w) const;
  static WaveletTree load(BinaryReader& r);

 private:
  std::uint64_t n_ = 0;
  std::uint32_t sigma_ = 0;
  std::uint32_t bits_ = 0;  // tree height, log2 of padded alphabet
  std::vector<BitVector> levels_;
};

}  // namespace cluedex
