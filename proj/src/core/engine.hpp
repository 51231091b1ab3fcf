#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "core/config.hpp"
#include "core/corpus.hpp"
#include "core/decoder.hpp"
#include "core/fm_index.hpp"
#include "core/jsonl.hpp"
#include "core/metrics.hpp"
#include "core/scorer.hpp"

namespace cluedex {

// Knowledge base and its index, persisted together in one container file.
// index_hash is the container content hash; it identifies the exact bytes a
// run retrieved against.
struct IndexArtifact {
  KnowledgeBase kb;
  FmIndex fm;
  std::string index_hash;

  static IndexArtifact build(const std::vector<RawDocument>& docs,
                             const TokenizerConfig& tokenizer_config,
                             std::uint32_t sample_rate);
  void save(const std::string& path) const;
  static IndexArtifact open(const std::string& path);
};

struct BuildStats {
  std::uint32_t docs = 0;
  std::uint64_t tokens = 0;
  std::uint32_t vocab = 0;
  double seconds = 0.0;
  std::string index_hash;
};

// Shared scorer for a run; null for the oracle, which is built per query.
std::unique_ptr<TokenScorer> make_scorer(const RunConfig& config, const IndexArtifact& index);

// Parallel, order-stable retrieval over the query batch. The oracle scorer
// (test only) requires every query to carry a planted clue.
ResultsFile run_retrieval(const IndexArtifact& index, const std::vector<Query>& queries,
                          const RunConfig& config);

// Metrics for an existing results file; refuses an index-hash mismatch
// unless config.force is set.
MetricReport evaluate_results(const IndexArtifact& index, const std::vector<Query>& queries,
                              const ResultsFile& results, const RunConfig& config);

BuildStats cmd_build_index(const RunConfig& config);
std::vector<ClueRecord> cmd_sample_clues(const RunConfig& config);
ResultsFile cmd_retrieve(const RunConfig& config);
MetricReport cmd_evaluate(const RunConfig& config);

// Same queries and scorer under each decode strategy.
std::vector<std::pair<std::string, MetricReport>> cmd_ablate(const RunConfig& config);

struct BenchReport {
  std::uint64_t index_tokens = 0;
  std::uint32_t index_docs = 0;
  std::uint64_t extension_probes = 0;
  double extend_p50_ms = 0.0;
  double extend_p95_ms = 0.0;
  double extend_max_ms = 0.0;
  std::uint64_t decodes = 0;
  double decode_p50_ms = 0.0;
  double decode_p95_ms = 0.0;
  double decode_max_ms = 0.0;

  std::string to_table() const;
};

// Times single-token extension queries and full decodes; builds a synthetic
// index when no index path is configured.
BenchReport cmd_bench_latency(const RunConfig& config);

}  // namespace cluedex
