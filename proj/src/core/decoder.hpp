#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/corpus.hpp"
#include "core/fm_index.hpp"
#include "core/scorer.hpp"

namespace cluedex {

enum class DecodeStrategy : std::uint8_t {
  kKnowledgeClue = 0,   // masked to corpus substrings, finalize on uniqueness
  kFullDocument = 1,    // masked, starts at document starts, runs to document end
  kFirstSentence = 2,   // masked, starts at document starts, completes at sentence end
  kFreeText = 3,        // unmasked, generated text looked up afterwards
};

DecodeStrategy parse_strategy(const std::string& name);
std::string strategy_name(DecodeStrategy s);

struct DecodeConfig {
  std::uint32_t num_beams = 20;
  std::uint32_t num_groups = 4;
  std::uint32_t l_min = 10;
  std::uint32_t l_max = 15;
  double length_penalty = 0.5;     // lambda, applied to tokens beyond l_min
  double diversity_penalty = 1.0;  // gamma, subtracted for same-step repeats across groups
  DecodeStrategy strategy = DecodeStrategy::kKnowledgeClue;

  void validate() const;
};

struct RankedDoc {
  std::uint32_t doc_id = 0;
  double score = 0.0;
  std::vector<TokenId> clue;
};

struct DecodeDiagnostics {
  std::uint64_t finalized = 0;
  std::uint64_t dropped_ambiguous = 0;
  std::uint64_t dead_ends = 0;
  std::uint64_t discarded_absent = 0;
};

// Ranked distinct documents, best clue per document, scores non-increasing.
struct RetrievalResult {
  std::vector<RankedDoc> ranked;
  DecodeDiagnostics diagnostics;
};

// Corpus-derived inputs the strategies need beyond the index itself.
struct DecodeContext {
  const FmIndex* fm = nullptr;
  const TokenScorer* scorer = nullptr;
  std::vector<TokenId> doc_start_tokens;  // distinct first tokens of documents
  std::vector<TokenId> terminators;       // sentence-final punctuation ids
  std::uint32_t max_doc_tokens = 0;

  static DecodeContext make(const FmIndex& fm, const TokenScorer& scorer,
                            const KnowledgeBase& kb);
};

// Knowledge-guided constrained beam search. Selection uses the masked
// distribution renormalized over the allowable set plus the group
// diversity penalty; reported scores are the raw autoregressive sums, so
// with length_penalty = 0 they equal sequence_score of the clue exactly.
RetrievalResult decode(const ScorerQuery& query, const DecodeContext& ctx,
                       const DecodeConfig& config);

}  // namespace cluedex
