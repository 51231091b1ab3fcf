#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "core/common.hpp"
#include "core/suffix_array.hpp"

using namespace cluedex;

namespace {

std::vector<std::uint64_t> naive_suffix_array(const std::vector<std::uint32_t>& text) {
  std::vector<std::uint64_t> sa(text.size());
  std::iota(sa.begin(), sa.end(), 0);
  std::sort(sa.begin(), sa.end(), [&](std::uint64_t a, std::uint64_t b) {
    return std::lexicographical_compare(text.begin() + a, text.end(), text.begin() + b,
                                        text.end());
  });
  return sa;
}

std::vector<std::uint32_t> with_sentinel(std::vector<std::uint32_t> body) {
  for (auto& s : body) ++s;  // keep 0 unique for the sentinel
  body.push_back(0);
  return body;
}

}  // namespace

TEST_SUITE("suffix_array") {

TEST_CASE("agrees with sorting on random texts") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<std::uint32_t> len_dist(0, 300);
    std::uniform_int_distribution<std::uint32_t> sigma_dist(1, trial % 2 ? 3 : 40);
    std::uint32_t len = len_dist(rng);
    std::uint32_t sigma = sigma_dist(rng);
    std::vector<std::uint32_t> body(len);
    std::uniform_int_distribution<std::uint32_t> sym(0, sigma - 1);
    for (auto& s : body) s = sym(rng);
    auto text = with_sentinel(std::move(body));
    REQUIRE(build_suffix_array(text, sigma + 1) == naive_suffix_array(text));
  }
}

TEST_CASE("degenerate shapes") {
  SUBCASE("sentinel only") {
    std::vector<std::uint32_t> text{0};
    REQUIRE(build_suffix_array(text, 1) == std::vector<std::uint64_t>{0});
  }
  SUBCASE("single run") {
    auto text = with_sentinel(std::vector<std::uint32_t>(500, 7));
    REQUIRE(build_suffix_array(text, 9) == naive_suffix_array(text));
  }
  SUBCASE("alternating pair") {
    std::vector<std::uint32_t> body;
    for (int i = 0; i < 301; ++i) body.push_back(i % 2);
    auto text = with_sentinel(std::move(body));
    REQUIRE(build_suffix_array(text, 3) == naive_suffix_array(text));
  }
  SUBCASE("strictly increasing and decreasing") {
    std::vector<std::uint32_t> up(64), down(64);
    for (std::uint32_t i = 0; i < 64; ++i) {
      up[i] = i;
      down[i] = 63 - i;
    }
    auto t1 = with_sentinel(std::move(up));
    auto t2 = with_sentinel(std::move(down));
    REQUIRE(build_suffix_array(t1, 65) == naive_suffix_array(t1));
    REQUIRE(build_suffix_array(t2, 65) == naive_suffix_array(t2));
  }
}

TEST_CASE("rejects malformed input") {
  REQUIRE_THROWS_AS(build_suffix_array({}, 1), Error);
  REQUIRE_THROWS_AS(build_suffix_array({1, 2, 3}, 4), Error);
}

}
