#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/container.hpp"
#include "core/tokenizer.hpp"

namespace cluedex {

struct Document {
  std::uint32_t id = 0;
  std::string title;
  std::vector<TokenId> tokens;
  std::string raw_text;  // not persisted; reconstructed as normalized text on load
};

struct RawDocument {
  std::string title;
  std::string text;
};

// Multi-modal query: token sequence plus an optional feature vector standing
// in for visual features. Judging data (answers / gold ids) rides along for
// evaluation.
struct Query {
  std::string id;
  std::string raw_text;
  std::vector<TokenId> text_tokens;
  std::vector<double> feature;
  std::vector<std::string> answers;
  std::vector<std::uint32_t> gold_doc_ids;
  std::vector<TokenId> oracle_clue;  // test-only scorer target
};

// Immutable after ingest; any number of threads may read concurrently.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;

  static KnowledgeBase ingest(const std::vector<RawDocument>& raw_docs,
                              const TokenizerConfig& config);

  const std::vector<Document>& docs() const { return docs_; }
  const Document& doc(std::uint32_t id) const;
  std::uint32_t size() const { return static_cast<std::uint32_t>(docs_.size()); }
  std::uint64_t total_tokens() const;

  const Tokenizer& tokenizer() const { return tokenizer_; }

  void save_sections(ContainerWriter& w) const;
  static KnowledgeBase load_sections(const ContainerReader& r);

  bool structurally_equal(const KnowledgeBase& other) const;

 private:
  std::vector<Document> docs_;
  Tokenizer tokenizer_;
};

}  // namespace cluedex
