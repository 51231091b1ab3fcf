#include "core/bitvector.hpp"

namespace cluedex {

void BitVector::finish() {
  std::uint64_t nblocks = (words_.size() + 7) / 8 + 1;
  blocks_.assign(nblocks, 0);
  std::uint64_t acc = 0;
  for (std::uint64_t w = 0; w < words_.size(); ++w) {
    if ((w & 7) == 0) blocks_[w >> 3] = acc;
    acc += static_cast<std::uint64_t>(std::popcount(words_[w]));
  }
  blocks_.back() = acc;
}

void BitVector::save(BinaryWriter& w) const {
  w.u64(n_);
  w.vec(words_);
  w.vec(blocks_);
}

BitVector BitVector::load(BinaryReader& r) {
  BitVector bv;
  bv.n_ = r.u64();
  bv.words_ = r.vec<std::uint64_t>();
  bv.blocks_ = r.vec<std::uint64_t>();
  return bv;
}

}  // namespace cluedex
