#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "core/common.hpp"
#include "core/decoder.hpp"
#include "core/external_scorer.hpp"
#include "core/metrics.hpp"
#include "core/sampler.hpp"
#include "core/scorer.hpp"
#include "core/tokenizer.hpp"

namespace cluedex {

// Everything a run needs, file-configurable and flag-overridable. Unknown
// keys are rejected so typos fail loudly instead of silently defaulting.
struct RunConfig {
  // paths
  std::string corpus_path;
  std::string index_path;
  std::string queries_path;
  std::string results_path;
  std::string output_path;
  std::string stopwords_path;

  // global
  std::uint64_t seed = 17;
  std::uint32_t threads = 0;  // 0 = all available cores
  std::uint32_t sample_rate = 32;
  std::uint32_t top_k = 10;  // ranked-list cutoff written to results
  bool force = false;        // accept hash mismatches in evaluate

  TokenizerConfig tokenizer;
  SamplerConfig sampler;
  std::string scorer_kind = "ngram";  // ngram | oracle | external
  NgramConfig ngram;
  ExternalScorerConfig external;
  DecodeConfig decode;
  std::vector<std::uint32_t> eval_ks = {1, 5, 10};
  JudgeMode judge = JudgeMode::kAnswerSubstring;

  // bench-latency corpus shape and probe counts
  std::uint32_t bench_docs = 10000;
  std::uint32_t bench_doc_tokens = 1000;
  std::uint32_t bench_vocab = 50000;
  std::uint32_t bench_probes = 200;
  std::uint32_t bench_decodes = 5;

  // Sets one dotted key; throws kConfig for unknown keys or bad values.
  void apply(const std::string& key, const std::string& value);
  void validate() const;

  // Deterministic full dump of every key; the config hash is the FNV-1a of
  // this text, so any semantic change to the run changes the hash.
  std::string canonical() const;
  std::string config_hash() const;
};

// key = value lines with optional [section] headers and # comments.
void load_config_file(RunConfig& config, const std::string& path);

void apply_overrides(RunConfig& config,
                     const std::vector<std::pair<std::string, std::string>>& overrides);

}  // namespace cluedex
