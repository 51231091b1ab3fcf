#include "core/wavelet.hpp"

#include <bit>

#include "core/common.hpp"

namespace cluedex {

WaveletTree WaveletTree::build(const std::vector<std::uint32_t>& seq, std::uint32_t sigma) {
  if (sigma == 0) throw_error(ErrorCode::kInvalidArgument, "wavelet tree needs a nonempty alphabet");
  WaveletTree wt;
  wt.n_ = seq.size();
  wt.sigma_ = sigma;
  wt.bits_ = sigma > 1 ? std::bit_width(sigma - 1) : 1;
  wt.levels_.reserve(wt.bits_);

  std::uint64_t n = seq.size();
  std::vector<std::uint32_t> cur = seq;
  std::vector<std::uint32_t> next(n);
  std::vector<std::uint64_t> starts;

  for (std::uint32_t level = 0; level < wt.bits_; ++level) {
    std::uint32_t s = wt.bits_ - 1 - level;
    BitVector bv(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      if ((cur[i] >> s) & 1) bv.set(i);
    }
    bv.finish();
    wt.levels_.push_back(std::move(bv));
    if (level + 1 == wt.bits_) break;

    // Stable scatter into buckets keyed by the top level+1 bits; cur is
    // already grouped by the top level bits, so this refines in place.
    std::uint64_t groups = std::uint64_t(1) << (level + 1);
    starts.assign(groups + 1, 0);
    for (std::uint64_t i = 0; i < n; ++i) ++starts[(cur[i] >> s) + 1];
    for (std::uint64_t g = 0; g < groups; ++g) starts[g + 1] += starts[g];
    for (std::uint64_t i = 0; i < n; ++i) next[starts[cur[i] >> s]++] = cur[i];
    cur.swap(next);
  }
  return wt;
}

std::uint32_t WaveletTree::access(std::uint64_t i) const {
  std::uint64_t lo = 0, hi = n_;
  std::uint32_t sym = 0;
  for (std::uint32_t level = 0; level < bits_; ++level) {
    const BitVector& bv = levels_[level];
    std::uint64_t z_node = bv.rank0(hi) - bv.rank0(lo);
    if (bv.get(i)) {
      sym |= std::uint32_t(1) << (bits_ - 1 - level);
      i = lo + z_node + ((i - lo) - (bv.rank0(i) - bv.rank0(lo)));
      lo += z_node;
    } else {
      i = lo + (bv.rank0(i) - bv.rank0(lo));
      hi = lo + z_node;
    }
  }
  return sym;
}

std::uint64_t WaveletTree::rank(std::uint32_t a, std::uint64_t i) const {
  if (a >= sigma_) return 0;
  std::uint64_t lo = 0, hi = n_;
  std::uint64_t p = i;
  for (std::uint32_t level = 0; level < bits_; ++level) {
    const BitVector& bv = levels_[level];
    std::uint64_t z_node = bv.rank0(hi) - bv.rank0(lo);
    std::uint64_t z = bv.rank0(lo + p) - bv.rank0(lo);
    if ((a >> (bits_ - 1 - level)) & 1) {
      p -= z;
      lo += z_node;
    } else {
      p = z;
      hi = lo + z_node;
    }
  }
  return p;
}

namespace {

struct DistinctWalk {
  const std::vector<BitVector>* levels;
  std::uint32_t bits;
  const std::function<void(std::uint32_t, std::uint64_t, std::uint64_t)>* cb;
  std::uint64_t limit = ~std::uint64_t(0);
  std::uint64_t found = 0;

  void walk(std::uint32_t level, std::uint64_t node_lo, std::uint64_t node_hi,
            std::uint64_t lo, std::uint64_t hi, std::uint32_t prefix) {
    if (found >= limit) return;
    if (level == bits) {
      ++found;
      if (cb) (*cb)(prefix, lo - node_lo, hi - node_lo);
      return;
    }
    const BitVector& bv = (*levels)[level];
    std::uint64_t z_node = bv.rank0(node_hi) - bv.rank0(node_lo);
    std::uint64_t z_lo = bv.rank0(lo) - bv.rank0(node_lo);
    std::uint64_t z_hi = bv.rank0(hi) - bv.rank0(node_lo);
    if (z_hi > z_lo) {
      walk(level + 1, node_lo, node_lo + z_node, node_lo + z_lo, node_lo + z_hi, prefix << 1);
    }
    std::uint64_t o_lo = (lo - node_lo) - z_lo;
    std::uint64_t o_hi = (hi - node_lo) - z_hi;
    if (o_hi > o_lo) {
      std::uint64_t right_lo = node_lo + z_node;
      walk(level + 1, right_lo, node_hi, right_lo + o_lo, right_lo + o_hi, (prefix << 1) | 1);
    }
  }
};

}  // namespace

void WaveletTree::range_distinct(
    std::uint64_t lo, std::uint64_t hi,
    const std::function<void(std::uint32_t, std::uint64_t, std::uint64_t)>& cb) const {
  if (lo >= hi) return;
  DistinctWalk w{&levels_, bits_, &cb};
  w.walk(0, 0, n_, lo, hi, 0);
}

std::uint64_t WaveletTree::distinct_count(std::uint64_t lo, std::uint64_t hi,
                                          std::uint64_t limit) const {
  if (lo >= hi || limit == 0) return 0;
  DistinctWalk w{&levels_, bits_, nullptr, limit};
  w.walk(0, 0, n_, lo, hi, 0);
  return w.found;
}

std::uint32_t WaveletTree::any_symbol(std::uint64_t lo, std::uint64_t hi) const {
  if (lo >= hi) throw_error(ErrorCode::kInvalidArgument, "any_symbol on an empty range");
  std::uint64_t node_lo = 0, node_hi = n_;
  std::uint32_t sym = 0;
  for (std::uint32_t level = 0; level < bits_; ++level) {
    const BitVector& bv = levels_[level];
    std::uint64_t z_node = bv.rank0(node_hi) - bv.rank0(node_lo);
    std::uint64_t z_lo = bv.rank0(lo) - bv.rank0(node_lo);
    std::uint64_t z_hi = bv.rank0(hi) - bv.rank0(node_lo);
    if (z_hi > z_lo) {
      sym <<= 1;
      node_hi = node_lo + z_node;
      lo = node_lo + z_lo;
      hi = node_lo + z_hi;
    } else {
      sym = (sym << 1) | 1;
      std::uint64_t right_lo = node_lo + z_node;
      lo = right_lo + ((lo - node_lo) - z_lo);
      hi = right_lo + ((hi - node_lo) - z_hi);
      node_lo = right_lo;
    }
  }
  return sym;
}

void WaveletTree::save(BinaryWriter& w) const {
  w.u64(n_);
  w.u32(sigma_);
  w.u32(bits_);
  for (const auto& bv : levels_) bv.save(w);
}

WaveletTree WaveletTree::load(BinaryReader& r) {
  WaveletTree wt;
  wt.n_ = r.u64();
  wt.sigma_ = r.u32();
  wt.bits_ = r.u32();
  wt.levels_.reserve(wt.bits_);
  for (std::uint32_t i = 0; i < wt.bits_; ++i) wt.levels_.push_back(BitVector::load(r));
  return wt;
}

}  // namespace cluedex
