#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <unordered_set>
#include <vector>

#include "core/common.hpp"
#include "core/corpus.hpp"

namespace cluedex {

// Query context handed to scorers: token sequence plus the derived keyword
// set (empty when keyword extraction is disabled).
struct ScorerQuery {
  std::vector<TokenId> tokens;
  std::vector<TokenId> keywords;
};

// Autoregressive next-token scorer. score_next fills `out` (resized to
// vocab_size) with log-probabilities; exp sums to 1 within 1e-6. Must be
// deterministic and safe to call from concurrent readers unless a
// subclass documents otherwise.
class TokenScorer {
 public:
  virtual ~TokenScorer() = default;
  virtual std::uint32_t vocab_size() const = 0;
  virtual void score_next(const ScorerQuery& query, std::span<const TokenId> context,
                          std::vector<double>& out) const = 0;
};

// Sum of per-step log-probabilities of `tokens` under the scorer, left to
// right, so prefix additivity holds exactly.
double sequence_score(const TokenScorer& scorer, const ScorerQuery& query,
                      std::span<const TokenId> tokens);

// Probability 1 on the next target token while the context follows the
// target; uniform everywhere else. Test instrument for end-to-end runs
// where the decode path must be forced down a known clue.
class OracleScorer final : public TokenScorer {
 public:
  OracleScorer(std::vector<TokenId> target, std::uint32_t vocab_size);

  std::uint32_t vocab_size() const override { return vocab_size_; }
  void score_next(const ScorerQuery& query, std::span<const TokenId> context,
                  std::vector<double>& out) const override;

 private:
  std::vector<TokenId> target_;
  std::uint32_t vocab_size_;
};

struct NgramConfig {
  std::uint32_t order = 3;           // k
  double alpha = 0.1;                // additive smoothing
  double beta = 2.0;                 // query-affinity logit bonus
  std::vector<double> weights;       // interpolation weights, defaults to uniform 1/k

  void validate() const;
};

// Interpolated k-gram model with additive smoothing, counted over the
// knowledge base, plus a query-affinity bonus: keyword tokens get +beta in
// logit space before renormalization. With beta = 0 the distribution is
// query-independent.
class NgramScorer final : public TokenScorer {
 public:
  static NgramScorer train(const KnowledgeBase& kb, const NgramConfig& config);

  std::uint32_t vocab_size() const override { return vocab_size_; }
  void score_next(const ScorerQuery& query, std::span<const TokenId> context,
                  std::vector<double>& out) const override;

  const NgramConfig& config() const { return config_; }

 private:
  struct OrderTable {
    // Packed (context, successor) keys, sorted; 21 bits per token. Flat
    // arrays instead of hash maps keep the footprint predictable at
    // ten-million-token corpus scale.
    std::vector<std::uint64_t> keys;
    std::vector<std::uint32_t> counts;
    // Packed context keys, sorted, with total successor counts.
    std::vector<std::uint64_t> ctx_keys;
    std::vector<std::uint64_t> ctx_totals;
  };

  NgramConfig config_;
  std::uint32_t vocab_size_ = 0;
  std::vector<OrderTable> tables_;  // tables_[j] = (j+1)-gram
};

}  // namespace cluedex
