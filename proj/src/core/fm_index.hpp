#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/bitvector.hpp"
#include "core/common.hpp"
#include "core/container.hpp"
#include "core/corpus.hpp"
#include "core/wavelet.hpp"

namespace cluedex {

// Half-open row interval of the suffix array plus the pattern length that
// produced it. An empty interval means the pattern is absent.
struct SearchState {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  std::uint32_t len = 0;

  bool absent() const { return lo >= hi; }
};

enum class Validity : std::uint8_t { kAbsent = 0, kUnique = 1, kAmbiguous = 2 };

struct Extension {
  TokenId token;
  SearchState state;
};

struct Occurrence {
  std::uint32_t doc = 0;
  std::uint64_t offset = 0;  // token offset of the match start within the document
};

// FM-index over the document stream D_0 SEP D_1 SEP ... D_{N-1} SEP. The
// index is built over the reversed stream, so appending a token to a
// pattern is a single backward-search step and get_next enumerates the
// tokens that can follow the current pattern somewhere in the corpus.
//
// Rows map to pattern end positions in the forward stream independently of
// pattern length, which lets a wavelet tree over per-row document ids
// answer "how many distinct documents contain this pattern" in O(log N)
// with early exit, instead of locating occurrences one by one.
class FmIndex {
 public:
  FmIndex() = default;

  static FmIndex build(const KnowledgeBase& kb, std::uint32_t sample_rate);

  // State matching every position (the empty pattern).
  SearchState root() const { return SearchState{0, n_ + 1, 0}; }

  // Number of occurrences of the state's pattern in the stream.
  std::uint64_t count(const SearchState& s) const {
    if (s.absent()) return 0;
    return s.len == 0 ? s.hi - s.lo - 1 : s.hi - s.lo;
  }

  // One backward-search step: the state for pattern + token.
  SearchState extend(const SearchState& s, TokenId token) const;

  // Fold of extend over a whole pattern.
  SearchState find(std::span<const TokenId> pattern) const;

  // All tokens that can extend the pattern, with their child states, in
  // increasing token order. Separators are excluded so extensions never
  // cross a document boundary.
  void get_next(const SearchState& s, std::vector<Extension>& out) const;

  // Does the pattern occur in zero documents, exactly one, or more than one.
  Validity valid_distinct(const SearchState& s) const;

  // Document id for a pattern unique to one document; throws kAbsent or
  // kAmbiguous otherwise.
  std::uint32_t lookup_doc(const SearchState& s) const;

  // Up to max_results match positions, resolved through the sampled suffix
  // array. Order is suffix-array row order, not text order.
  std::vector<Occurrence> locate(const SearchState& s, std::uint64_t max_results) const;

  std::uint64_t stream_tokens() const { return n_; }
  std::uint32_t num_docs() const { return num_docs_; }
  std::uint32_t sample_rate() const { return sample_rate_; }
  std::uint32_t vocab_size() const { return sigma_ - 1; }

  void save_sections(ContainerWriter& w) const;
  static FmIndex load_sections(const ContainerReader& r);

 private:
  std::uint64_t n_ = 0;           // forward stream length, separators included
  std::uint32_t sigma_ = 0;       // internal alphabet: sentinel + shifted token ids
  std::uint32_t num_docs_ = 0;
  std::uint32_t sample_rate_ = 32;
  std::vector<std::uint64_t> c_;  // C[a] = rows whose suffix starts with a symbol < a
  WaveletTree bwt_;
  WaveletTree doc_;               // document id per row, keyed by pattern end position
  BitVector sampled_rows_;
  std::vector<std::uint64_t> samples_;
  std::vector<std::uint64_t> doc_starts_;

  std::uint64_t lf(std::uint64_t row) const;
  std::uint64_t suffix_position(std::uint64_t row) const;
};

}  // namespace cluedex
