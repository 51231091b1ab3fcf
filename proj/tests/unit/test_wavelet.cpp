#include <doctest.h>

#include <map>
#include <random>
#include <set>
#include <vector>

#include "core/binio.hpp"
#include "core/wavelet.hpp"

using namespace cluedex;

namespace {

std::vector<std::uint32_t> random_seq(std::uint64_t n, std::uint32_t sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> sym(0, sigma - 1);
  std::vector<std::uint32_t> seq(n);
  for (auto& s : seq) s = sym(rng);
  return seq;
}

}  // namespace

TEST_SUITE("wavelet") {

TEST_CASE("access and rank match the sequence") {
  for (std::uint32_t sigma : {1u, 2u, 3u, 5u, 16u, 17u, 100u}) {
    auto seq = random_seq(700, sigma, sigma * 31 + 1);
    WaveletTree wt = WaveletTree::build(seq, sigma);
    REQUIRE(wt.size() == seq.size());

    std::vector<std::uint64_t> running(sigma, 0);
    for (std::uint64_t i = 0; i < seq.size(); ++i) {
      REQUIRE(wt.access(i) == seq[i]);
      for (std::uint32_t a = 0; a < sigma; ++a) REQUIRE(wt.rank(a, i) == running[a]);
      ++running[seq[i]];
    }
    for (std::uint32_t a = 0; a < sigma; ++a) REQUIRE(wt.rank(a, seq.size()) == running[a]);
    REQUIRE(wt.rank(sigma + 5, seq.size()) == 0);
  }
}

TEST_CASE("range_distinct reports each symbol with its rank bounds") {
  std::mt19937_64 rng(99);
  auto seq = random_seq(400, 23, 5);
  WaveletTree wt = WaveletTree::build(seq, 23);
  std::uniform_int_distribution<std::uint64_t> pos(0, seq.size());

  for (int trial = 0; trial < 300; ++trial) {
    std::uint64_t a = pos(rng), b = pos(rng);
    std::uint64_t lo = std::min(a, b), hi = std::max(a, b);

    std::map<std::uint32_t, std::pair<std::uint64_t, std::uint64_t>> expect;
    for (std::uint32_t sym = 0; sym < 23; ++sym) {
      std::uint64_t rlo = wt.rank(sym, lo), rhi = wt.rank(sym, hi);
      if (rhi > rlo) expect[sym] = {rlo, rhi};
    }

    std::map<std::uint32_t, std::pair<std::uint64_t, std::uint64_t>> got;
    std::uint32_t last = 0;
    bool first = true;
    wt.range_distinct(lo, hi, [&](std::uint32_t sym, std::uint64_t rlo, std::uint64_t rhi) {
      if (!first) REQUIRE(sym > last);  // increasing symbol order
      first = false;
      last = sym;
      got[sym] = {rlo, rhi};
    });
    REQUIRE(got == expect);
  }
}

TEST_CASE("distinct_count stops at the limit") {
  auto seq = random_seq(300, 12, 77);
  WaveletTree wt = WaveletTree::build(seq, 12);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::uint64_t> pos(0, seq.size());

  for (int trial = 0; trial < 200; ++trial) {
    std::uint64_t a = pos(rng), b = pos(rng);
    std::uint64_t lo = std::min(a, b), hi = std::max(a, b);
    std::set<std::uint32_t> expect(seq.begin() + lo, seq.begin() + hi);
    REQUIRE(wt.distinct_count(lo, hi, 1000) == expect.size());
    for (std::uint64_t limit : {0ull, 1ull, 2ull, 3ull}) {
      REQUIRE(wt.distinct_count(lo, hi, limit) == std::min<std::uint64_t>(limit, expect.size()));
    }
  }
}

TEST_CASE("any_symbol returns a member of the range") {
  auto seq = random_seq(200, 9, 13);
  WaveletTree wt = WaveletTree::build(seq, 9);
  for (std::uint64_t lo = 0; lo < seq.size(); lo += 7) {
    for (std::uint64_t hi = lo + 1; hi <= seq.size(); hi += 13) {
      std::uint32_t sym = wt.any_symbol(lo, hi);
      bool present = false;
      for (std::uint64_t i = lo; i < hi; ++i) present |= seq[i] == sym;
      REQUIRE(present);
    }
  }
  REQUIRE_THROWS_AS(wt.any_symbol(5, 5), Error);
}

TEST_CASE("save and load round trip") {
  auto seq = random_seq(500, 40, 21);
  WaveletTree wt = WaveletTree::build(seq, 40);
  BinaryWriter w;
  wt.save(w);
  BinaryReader r(w.data());
  WaveletTree back = WaveletTree::load(r);
  REQUIRE(back.size() == wt.size());
  REQUIRE(back.sigma() == wt.sigma());
  for (std::uint64_t i = 0; i < seq.size(); ++i) REQUIRE(back.access(i) == seq[i]);
  for (std::uint32_t a = 0; a < 40; ++a) REQUIRE(back.rank(a, seq.size()) == wt.rank(a, seq.size()));
}

}
