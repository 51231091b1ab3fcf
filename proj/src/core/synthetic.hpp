#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/corpus.hpp"

namespace cluedex::synthetic {

struct SyntheticQuery {
  std::string id;
  std::string text;
  std::vector<std::uint32_t> gold_doc_ids;
  std::string clue_text;  // planted target clue, empty when not applicable
};

struct SyntheticSet {
  std::vector<RawDocument> docs;
  std::vector<SyntheticQuery> queries;
};

// Each document is filler plus one contiguous run of clue_len words that
// occur nowhere else in the corpus; query i targets document i and carries
// the planted clue text for oracle-guided decoding.
SyntheticSet planted_clue_set(std::uint32_t num_docs, std::uint32_t filler_tokens,
                              std::uint32_t clue_len, std::uint64_t seed);

// Topical documents: shared filler vocabulary plus per-document topic words
// that never leak into other documents. Queries list topic words of their
// gold document. With shared_first_sentence every document opens with the
// same boilerplate sentence.
SyntheticSet topic_set(std::uint32_t num_docs, std::uint32_t num_queries,
                       bool shared_first_sentence, std::uint64_t seed);

// Uniform random word soup, sentence-broken every ~15 tokens. Sized by
// total token budget; used for fuzzing and latency measurements.
std::vector<RawDocument> random_docs(std::uint32_t num_docs, std::uint32_t tokens_per_doc,
                                     std::uint32_t vocab_words, std::uint64_t seed);

// Queries materialized against an ingested knowledge base: text tokenized,
// planted clues resolved to token ids for the oracle scorer.
std::vector<Query> materialize_queries(const SyntheticSet& set, const KnowledgeBase& kb);

}  // namespace cluedex::synthetic
