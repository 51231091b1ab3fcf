#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/corpus.hpp"
#include "core/decoder.hpp"

namespace cluedex {

// One sampled clue, tied back to the query and document it came from.
struct ClueRecord {
  std::string query_id;
  std::uint32_t doc_id = 0;
  std::vector<TokenId> clue_tokens;
  std::string clue_text;
  std::uint64_t start = 0;
  std::uint64_t sentence_index = 0;
};

struct RankedEntry {
  std::uint32_t doc_id = 0;
  double score = 0.0;
  std::string clue_text;
};

struct ResultRecord {
  std::string query_id;
  std::vector<RankedEntry> ranked;
  DecodeDiagnostics diagnostics;
};

// results.jsonl = one meta line carrying the run hashes, then one record
// per query in input order.
struct ResultsFile {
  std::string config_hash;
  std::string index_hash;
  std::vector<ResultRecord> records;
};

// All readers report malformed input as kFormat with "path:line:".
std::vector<RawDocument> read_corpus_jsonl(const std::string& path);

// Queries are tokenized against the knowledge base's frozen tokenizer.
std::vector<Query> read_queries_jsonl(const std::string& path, const Tokenizer& tokenizer);

void write_clues_jsonl(const std::string& path, const std::vector<ClueRecord>& clues);
std::vector<ClueRecord> read_clues_jsonl(const std::string& path);

void write_results_jsonl(const std::string& path, const ResultsFile& results);
ResultsFile read_results_jsonl(const std::string& path);

}  // namespace cluedex
