#include "core/suffix_array.hpp"

#include <algorithm>
#include <cstring>

#include "core/common.hpp"

namespace cluedex {
namespace {

constexpr std::uint64_t kEmpty = ~std::uint64_t(0);

// One SA-IS recursion level. T is the text (sigma distinct symbols, unique
// smallest sentinel at the end), SA receives the suffix order.
template <typename Sym>
void sais(const Sym* t, std::uint64_t n, std::uint64_t sigma,
          std::vector<std::uint64_t>& sa) {
  sa.assign(n, kEmpty);
  if (n == 1) {
    sa[0] = 0;
    return;
  }

  // stype[i] = true when suffix i is S-type (smaller than its successor).
  std::vector<bool> stype(n, false);
  stype[n - 1] = true;
  for (std::uint64_t i = n - 1; i-- > 0;) {
    stype[i] = t[i] < t[i + 1] || (t[i] == t[i + 1] && stype[i + 1]);
  }
  auto is_lms = [&](std::uint64_t i) { return i > 0 && stype[i] && !stype[i - 1]; };

  std::vector<std::uint64_t> bucket(sigma + 1, 0);
  for (std::uint64_t i = 0; i < n; ++i) ++bucket[t[i] + 1];
  for (std::uint64_t a = 0; a < sigma; ++a) bucket[a + 1] += bucket[a];

  std::vector<std::uint64_t> ptr(sigma);
  auto bucket_heads = [&] { std::memcpy(ptr.data(), bucket.data(), sigma * sizeof(std::uint64_t)); };
  auto bucket_tails = [&] { std::memcpy(ptr.data(), bucket.data() + 1, sigma * sizeof(std::uint64_t)); };

  // Induced sort from a set of LMS positions already placed in SA.
  auto induce = [&] {
    bucket_heads();
    for (std::uint64_t r = 0; r < n; ++r) {
      std::uint64_t i = sa[r];
      if (i == kEmpty || i == 0) continue;
      std::uint64_t j = i - 1;
      if (!stype[j]) sa[ptr[t[j]]++] = j;
    }
    bucket_tails();
    for (std::uint64_t r = n; r-- > 0;) {
      std::uint64_t i = sa[r];
      if (i == kEmpty || i == 0) continue;
      std::uint64_t j = i - 1;
      if (stype[j]) sa[--ptr[t[j]]] = j;
    }
  };

  // Pass 1: place LMS suffixes at bucket tails in text order, induce.
  bucket_tails();
  for (std::uint64_t i = 1; i < n; ++i) {
    if (is_lms(i)) sa[--ptr[t[i]]] = i;
  }
  induce();

  // Collect LMS suffixes in induced order and name their substrings.
  std::vector<std::uint64_t> lms_order;
  lms_order.reserve(n / 2 + 1);
  for (std::uint64_t r = 0; r < n; ++r) {
    if (sa[r] != kEmpty && is_lms(sa[r])) lms_order.push_back(sa[r]);
  }
  std::uint64_t num_lms = lms_order.size();

  std::vector<std::uint64_t> name_of(n, kEmpty);
  std::uint64_t names = 0;
  std::uint64_t prev = kEmpty;
  for (std::uint64_t k = 0; k < num_lms; ++k) {
    std::uint64_t cur = lms_order[k];
    if (prev == kEmpty) {
      name_of[cur] = names++;
    } else {
      // Compare LMS substrings [prev..] and [cur..] up to the next LMS start.
      bool same = true;
      for (std::uint64_t d = 0;; ++d) {
        bool pl = d > 0 && is_lms(prev + d);
        bool cl = d > 0 && is_lms(cur + d);
        if (t[prev + d] != t[cur + d] || stype[prev + d] != stype[cur + d]) {
          same = false;
          break;
        }
        if (pl || cl) {
          same = pl && cl;
          break;
        }
      }
      if (!same) ++names;
      name_of[cur] = names - 1;
    }
    prev = cur;
  }

  // Order LMS suffixes, recursing only when names collide.
  std::vector<std::uint64_t> lms_pos;
  lms_pos.reserve(num_lms);
  for (std::uint64_t i = 1; i < n; ++i) {
    if (is_lms(i)) lms_pos.push_back(i);
  }
  std::vector<std::uint64_t> lms_sorted(num_lms);
  if (names < num_lms) {
    std::vector<std::uint64_t> reduced(num_lms);
    for (std::uint64_t k = 0; k < num_lms; ++k) reduced[k] = name_of[lms_pos[k]];
    std::vector<std::uint64_t> sub_sa;
    sais(reduced.data(), num_lms, names, sub_sa);
    for (std::uint64_t k = 0; k < num_lms; ++k) lms_sorted[k] = lms_pos[sub_sa[k]];
  } else {
    for (std::uint64_t k = 0; k < num_lms; ++k) lms_sorted[name_of[lms_pos[k]]] = lms_pos[k];
  }

  // Pass 2: place sorted LMS suffixes, induce the final order.
  std::fill(sa.begin(), sa.end(), kEmpty);
  bucket_tails();
  for (std::uint64_t k = num_lms; k-- > 0;) {
    std::uint64_t i = lms_sorted[k];
    sa[--ptr[t[i]]] = i;
  }
  induce();
}

}  // namespace

std::vector<std::uint64_t> build_suffix_array(const std::vector<std::uint32_t>& text,
                                              std::uint32_t sigma) {
  if (text.empty()) throw_error(ErrorCode::kInvalidArgument, "suffix array input is empty");
  if (text.back() != 0) {
    throw_error(ErrorCode::kInvalidArgument, "suffix array input must end with sentinel 0");
  }
  std::vector<std::uint64_t> sa;
  sais(text.data(), text.size(), sigma, sa);
  return sa;
}

}  // namespace cluedex
