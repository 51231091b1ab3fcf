#pragma once

#include <cstdint>
#include <random>
#include <unordered_set>
#include <vector>

#include "core/common.hpp"
#include "core/corpus.hpp"

namespace cluedex {

struct SentenceRange {
  std::size_t begin = 0;  // token offsets within the document, [begin, end)
  std::size_t end = 0;
};

struct SpanCandidate {
  std::size_t sentence_index = 0;
  std::size_t start = 0;  // document-absolute token offset
  std::size_t length = 0;
  std::uint32_t hits = 0;  // distinct query keywords inside the span
  double pi = 0.0;         // hits / (hits + rho)
  double prob = 0.0;       // softmax over all candidates
};

struct SamplerConfig {
  double rho = 1.0;        // smoothing in pi = c / (c + rho)
  std::uint32_t n = 12;    // span window length
  std::uint32_t m = 2;     // clues per document
  std::uint32_t l = 12;    // clue length
  std::uint64_t seed = 0;  // seeds the caller's RNG; sampling itself takes the RNG

  void validate() const;
};

struct SampledClue {
  std::vector<TokenId> tokens;
  std::size_t start = 0;
  std::size_t sentence_index = 0;
};

// Sentence boundaries fall after terminator tokens (. ! ?); a document
// without terminators is one sentence. Ranges partition the document.
std::vector<SentenceRange> split_sentences(const Document& doc, const Tokenizer& tokenizer);

// Distinct members of `keywords` occurring in doc[begin, end).
std::uint32_t keyword_hits(const Document& doc, std::size_t begin, std::size_t end,
                           const std::vector<TokenId>& keywords);

// Candidate starts over the sentences with the most keyword hits (all tied
// sentences pooled), one candidate per in-sentence window of length n,
// probabilities softmax-normalized over the pool.
std::vector<SpanCandidate> span_distribution(const Document& doc, const Tokenizer& tokenizer,
                                             const std::vector<TokenId>& keywords,
                                             const SamplerConfig& config);

// m starts drawn with replacement from the span distribution; each clue is
// l tokens from its start, truncated at the document end.
std::vector<SampledClue> sample_clues(const Document& doc, const Tokenizer& tokenizer,
                                      const std::vector<TokenId>& keywords,
                                      const SamplerConfig& config, std::mt19937_64& rng);

// Uniform double in [0,1) from the top 53 bits; pinned here so sampling is
// reproducible across standard library implementations.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace cluedex
