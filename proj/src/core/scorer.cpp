#include "core/scorer.hpp"

#include <algorithm>
#include <cmath>

namespace cluedex {

double sequence_score(const TokenScorer& scorer, const ScorerQuery& query,
                      std::span<const TokenId> tokens) {
  if (tokens.empty()) {
    throw_error(ErrorCode::kInvalidArgument, "cannot score an empty sequence");
  }
  std::vector<double> logprobs;
  double sum = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    scorer.score_next(query, tokens.subspan(0, i), logprobs);
    sum += logprobs[tokens[i]];
  }
  return sum;
}

OracleScorer::OracleScorer(std::vector<TokenId> target, std::uint32_t vocab_size)
    : target_(std::move(target)), vocab_size_(vocab_size) {
  if (target_.empty()) throw_error(ErrorCode::kInvalidArgument, "oracle target is empty");
  for (TokenId t : target_) {
    if (t >= vocab_size_) {
      throw_error(ErrorCode::kInvalidArgument, "oracle target token outside the vocabulary");
    }
  }
}

void OracleScorer::score_next(const ScorerQuery& query, std::span<const TokenId> context,
                              std::vector<double>& out) const {
  (void)query;
  out.assign(vocab_size_, 0.0);
  bool on_path = context.size() < target_.size() &&
                 std::equal(context.begin(), context.end(), target_.begin());
  if (on_path) {
    std::fill(out.begin(), out.end(), kNegInf);
    out[target_[context.size()]] = 0.0;
  } else {
    std::fill(out.begin(), out.end(), -std::log(static_cast<double>(vocab_size_)));
  }
}

void NgramConfig::validate() const {
  if (order < 1) throw_error(ErrorCode::kConfig, "n-gram order must be >= 1");
  if (order > 3) throw_error(ErrorCode::kConfig, "n-gram order above 3 is not supported");
  if (alpha <= 0.0) throw_error(ErrorCode::kConfig, "n-gram smoothing alpha must be > 0");
  if (beta < 0.0) throw_error(ErrorCode::kConfig, "query-affinity beta must be >= 0");
  if (!weights.empty()) {
    if (weights.size() != order) {
      throw_error(ErrorCode::kConfig, "interpolation weights must match the order");
    }
    double sum = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw_error(ErrorCode::kConfig, "interpolation weights must be >= 0");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw_error(ErrorCode::kConfig, "interpolation weights must sum to 1");
    }
  }
}

namespace {

constexpr std::uint32_t kTokenBits = 21;
constexpr std::uint64_t kMaxVocab = (std::uint64_t(1) << kTokenBits) - 1;

std::uint64_t pack(std::span<const TokenId> toks) {
  std::uint64_t key = 0;
  for (TokenId t : toks) key = (key << kTokenBits) | (t + 1);
  return key;
}

}  // namespace

NgramScorer NgramScorer::train(const KnowledgeBase& kb, const NgramConfig& config) {
  config.validate();
  NgramScorer scorer;
  scorer.config_ = config;
  scorer.vocab_size_ = kb.tokenizer().vocab_size();
  if (scorer.vocab_size_ > kMaxVocab) {
    throw_error(ErrorCode::kInvalidArgument, "vocabulary too large for packed n-gram keys");
  }
  if (scorer.config_.weights.empty()) {
    scorer.config_.weights.assign(config.order, 1.0 / config.order);
  }

  scorer.tables_.resize(config.order);
  for (std::uint32_t j = 1; j <= config.order; ++j) {
    std::vector<std::uint64_t> raw;
    for (const Document& d : kb.docs()) {
      if (d.tokens.size() < j) continue;
      for (std::size_t i = j - 1; i < d.tokens.size(); ++i) {
        raw.push_back(pack({&d.tokens[i - (j - 1)], j}));
      }
    }
    std::sort(raw.begin(), raw.end());

    OrderTable& table = scorer.tables_[j - 1];
    for (std::size_t i = 0; i < raw.size();) {
      std::size_t e = i;
      while (e < raw.size() && raw[e] == raw[i]) ++e;
      table.keys.push_back(raw[i]);
      table.counts.push_back(static_cast<std::uint32_t>(e - i));
      i = e;
    }
    // Keys sort by (context, successor), so per-context totals aggregate
    // in one linear pass.
    for (std::size_t i = 0; i < table.keys.size();) {
      std::uint64_t ctx = table.keys[i] >> kTokenBits;
      std::uint64_t total = 0;
      std::size_t e = i;
      while (e < table.keys.size() && (table.keys[e] >> kTokenBits) == ctx) {
        total += table.counts[e];
        ++e;
      }
      table.ctx_keys.push_back(ctx);
      table.ctx_totals.push_back(total);
      i = e;
    }
  }
  return scorer;
}

void NgramScorer::score_next(const ScorerQuery& query, std::span<const TokenId> context,
                             std::vector<double>& out) const {
  const std::uint32_t v = vocab_size_;
  out.assign(v, 0.0);

  // Orders longer than the available context drop out; the remaining
  // interpolation weights renormalize so the mixture stays a distribution.
  double weight_sum = 0.0;
  for (std::uint32_t j = 1; j <= config_.order; ++j) {
    if (context.size() + 1 >= j) weight_sum += config_.weights[j - 1];
  }

  for (std::uint32_t j = 1; j <= config_.order; ++j) {
    if (context.size() + 1 < j) continue;
    double w = config_.weights[j - 1] / weight_sum;
    const OrderTable& table = tables_[j - 1];

    std::uint64_t ctx = pack(context.subspan(context.size() - (j - 1), j - 1));
    auto ctx_it = std::lower_bound(table.ctx_keys.begin(), table.ctx_keys.end(), ctx);
    std::uint64_t total = 0;
    if (ctx_it != table.ctx_keys.end() && *ctx_it == ctx) {
      total = table.ctx_totals[ctx_it - table.ctx_keys.begin()];
    }

    double denom = static_cast<double>(total) + config_.alpha * v;
    double base = w * config_.alpha / denom;
    for (std::uint32_t t = 0; t < v; ++t) out[t] += base;

    std::uint64_t lo_key = ctx << kTokenBits;
    std::uint64_t hi_key = (ctx + 1) << kTokenBits;
    auto lo = std::lower_bound(table.keys.begin(), table.keys.end(), lo_key);
    auto hi = std::lower_bound(table.keys.begin(), table.keys.end(), hi_key);
    for (auto it = lo; it != hi; ++it) {
      TokenId t = static_cast<TokenId>((*it & kMaxVocab) - 1);
      out[t] += w * table.counts[it - table.keys.begin()] / denom;
    }
  }

  // Query-affinity bonus in logit space, then renormalize.
  for (std::uint32_t t = 0; t < v; ++t) out[t] = std::log(out[t]);
  if (config_.beta > 0.0) {
    for (TokenId t : query.keywords) {
      if (t < v) out[t] += config_.beta;
    }
  }
  double max_logit = *std::max_element(out.begin(), out.end());
  double z = 0.0;
  for (double l : out) z += std::exp(l - max_logit);
  double log_z = max_logit + std::log(z);
  for (double& l : out) l -= log_z;
}

}  // namespace cluedex
