#include "core/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace cluedex {

DecodeStrategy parse_strategy(const std::string& name) {
  if (name == "knowledge_clue") return DecodeStrategy::kKnowledgeClue;
  if (name == "full_document") return DecodeStrategy::kFullDocument;
  if (name == "first_sentence") return DecodeStrategy::kFirstSentence;
  if (name == "free_text") return DecodeStrategy::kFreeText;
  throw_error(ErrorCode::kConfig, "unknown decode strategy: " + name);
}

std::string strategy_name(DecodeStrategy s) {
  switch (s) {
    case DecodeStrategy::kKnowledgeClue: return "knowledge_clue";
    case DecodeStrategy::kFullDocument: return "full_document";
    case DecodeStrategy::kFirstSentence: return "first_sentence";
    case DecodeStrategy::kFreeText: return "free_text";
  }
  throw_error(ErrorCode::kInvalidArgument, "invalid strategy value");
}

void DecodeConfig::validate() const {
  if (num_beams < 1) throw_error(ErrorCode::kConfig, "num_beams must be >= 1");
  if (num_groups < 1) throw_error(ErrorCode::kConfig, "num_groups must be >= 1");
  if (num_beams % num_groups != 0) {
    throw_error(ErrorCode::kConfig, "num_beams must be divisible by num_groups");
  }
  if (l_min < 1) throw_error(ErrorCode::kConfig, "l_min must be >= 1");
  if (l_min > l_max) throw_error(ErrorCode::kConfig, "l_min must be <= l_max");
  if (length_penalty < 0.0) throw_error(ErrorCode::kConfig, "length_penalty must be >= 0");
  if (diversity_penalty < 0.0) throw_error(ErrorCode::kConfig, "diversity_penalty must be >= 0");
}

DecodeContext DecodeContext::make(const FmIndex& fm, const TokenScorer& scorer,
                                  const KnowledgeBase& kb) {
  DecodeContext ctx;
  ctx.fm = &fm;
  ctx.scorer = &scorer;

  std::unordered_set<TokenId> starts;
  std::uint32_t longest = 0;
  for (const Document& d : kb.docs()) {
    starts.insert(d.tokens.front());
    longest = std::max(longest, static_cast<std::uint32_t>(d.tokens.size()));
  }
  ctx.doc_start_tokens.assign(starts.begin(), starts.end());
  std::sort(ctx.doc_start_tokens.begin(), ctx.doc_start_tokens.end());
  ctx.max_doc_tokens = longest;

  for (const char* p : {".", "!", "?"}) {
    TokenId t = kb.tokenizer().lookup(p);
    if (t != kUnkToken) ctx.terminators.push_back(t);
  }
  return ctx;
}

namespace {

struct Beam {
  std::vector<TokenId> tokens;
  SearchState state;
  double raw_sum = 0.0;  // sum of unmasked scorer logprobs along the path
  double sel_sum = 0.0;  // pruning objective: renormalized and diversity-penalized
};

struct Candidate {
  std::size_t parent = 0;
  TokenId token = 0;
  SearchState state;
  double raw_lp = 0.0;
  double sel = 0.0;
};

struct Finalized {
  std::vector<TokenId> tokens;
  std::uint32_t doc = 0;
  double raw_sum = 0.0;
};

bool candidate_before(const Candidate& a, const Candidate& b) {
  if (a.sel != b.sel) return a.sel > b.sel;
  if (a.token != b.token) return a.token < b.token;
  return a.parent < b.parent;
}

}  // namespace

RetrievalResult decode(const ScorerQuery& query, const DecodeContext& ctx,
                       const DecodeConfig& config) {
  config.validate();
  const FmIndex& fm = *ctx.fm;
  const TokenScorer& scorer = *ctx.scorer;
  if (query.tokens.empty()) {
    throw_error(ErrorCode::kInvalidArgument, "cannot decode an empty query");
  }
  if (scorer.vocab_size() != fm.vocab_size()) {
    throw_error(ErrorCode::kVocabMismatch,
                "scorer vocabulary (" + std::to_string(scorer.vocab_size()) +
                    ") does not match the index (" + std::to_string(fm.vocab_size()) + ")");
  }

  const DecodeStrategy strategy = config.strategy;
  const bool masked = strategy != DecodeStrategy::kFreeText;
  const bool doc_start_first = strategy == DecodeStrategy::kFullDocument ||
                               strategy == DecodeStrategy::kFirstSentence;
  const std::uint32_t beams_per_group = config.num_beams / config.num_groups;
  std::uint32_t horizon = config.l_max;
  if (strategy == DecodeStrategy::kFullDocument ||
      strategy == DecodeStrategy::kFirstSentence) {
    horizon = std::max(horizon, ctx.max_doc_tokens);
  }
  if (strategy == DecodeStrategy::kFreeText) horizon = config.l_min;

  const std::unordered_set<TokenId> start_set(ctx.doc_start_tokens.begin(),
                                              ctx.doc_start_tokens.end());
  const std::unordered_set<TokenId> terminator_set(ctx.terminators.begin(),
                                                   ctx.terminators.end());

  RetrievalResult result;
  DecodeDiagnostics& diag = result.diagnostics;
  std::vector<Finalized> finalized;

  // Validation outcome for a completed or checkpointed hypothesis.
  auto resolve = [&](Beam& b, bool must_resolve) -> bool {
    SearchState s = masked ? b.state : fm.find(b.tokens);
    Validity v = fm.valid_distinct(s);
    if (v == Validity::kUnique) {
      finalized.push_back(Finalized{std::move(b.tokens), fm.lookup_doc(s), b.raw_sum});
      ++diag.finalized;
      return true;
    }
    if (must_resolve) {
      if (v == Validity::kAbsent) {
        ++diag.discarded_absent;
      } else {
        ++diag.dropped_ambiguous;
      }
    }
    return must_resolve;  // true = beam leaves the pool either way
  };

  std::vector<std::vector<Beam>> pools(config.num_groups);
  std::vector<std::uint32_t> capacity(config.num_groups, beams_per_group);
  for (auto& pool : pools) pool.push_back(Beam{{}, fm.root(), 0.0, 0.0});

  std::vector<double> logprobs;
  std::vector<Extension> extensions;
  std::vector<Candidate> candidates;

  for (std::uint32_t step = 1; step <= horizon; ++step) {
    std::unordered_map<TokenId, std::uint32_t> step_counts;
    bool any_growing = false;

    for (std::uint32_t g = 0; g < config.num_groups; ++g) {
      std::vector<Beam>& pool = pools[g];
      if (pool.empty() || capacity[g] == 0) {
        pool.clear();
        continue;
      }

      candidates.clear();
      for (std::size_t bi = 0; bi < pool.size(); ++bi) {
        Beam& b = pool[bi];

        extensions.clear();
        if (masked) {
          fm.get_next(b.state, extensions);
          if (step == 1 && doc_start_first) {
            std::erase_if(extensions,
                          [&](const Extension& e) { return !start_set.count(e.token); });
          }
        } else {
          // Unmasked: every real token is a candidate continuation.
          for (TokenId t = kUnkToken; t < fm.vocab_size(); ++t) {
            extensions.push_back(Extension{t, SearchState{}});
          }
        }
        if (extensions.empty()) {
          ++diag.dead_ends;
          continue;
        }

        scorer.score_next(query, b.tokens, logprobs);

        // Renormalize over the allowable set so hypotheses with different
        // mask sizes compare fairly.
        double max_lp = kNegInf;
        for (const Extension& e : extensions) max_lp = std::max(max_lp, logprobs[e.token]);
        double lse;
        bool no_mass = max_lp <= kNegInf / 2;
        if (no_mass) {
          lse = std::log(static_cast<double>(extensions.size()));
        } else {
          double z = 0.0;
          for (const Extension& e : extensions) z += std::exp(logprobs[e.token] - max_lp);
          lse = max_lp + std::log(z);
        }

        for (const Extension& e : extensions) {
          Candidate c;
          c.parent = bi;
          c.token = e.token;
          c.state = e.state;
          c.raw_lp = logprobs[e.token];
          double renorm = no_mass ? -lse : logprobs[e.token] - lse;
          auto it = step_counts.find(e.token);
          double penalty = it == step_counts.end()
                               ? 0.0
                               : config.diversity_penalty * static_cast<double>(it->second);
          c.sel = b.sel_sum + renorm - penalty;
          candidates.push_back(c);
        }
      }

      std::uint32_t want = std::min<std::uint32_t>(capacity[g],
                                                   static_cast<std::uint32_t>(candidates.size()));
      std::partial_sort(candidates.begin(), candidates.begin() + want, candidates.end(),
                        candidate_before);

      std::vector<Beam> next_pool;
      next_pool.reserve(want);
      for (std::uint32_t i = 0; i < want; ++i) {
        const Candidate& c = candidates[i];
        Beam nb;
        nb.tokens = pool[c.parent].tokens;
        nb.tokens.push_back(c.token);
        nb.state = c.state;
        nb.raw_sum = pool[c.parent].raw_sum + c.raw_lp;
        nb.sel_sum = c.sel;
        ++step_counts[c.token];

        bool remove = false;
        switch (strategy) {
          case DecodeStrategy::kKnowledgeClue:
            if (step >= config.l_min) remove = resolve(nb, step == config.l_max);
            break;
          case DecodeStrategy::kFullDocument: {
            // Document complete when nothing can follow (end of document).
            fm.get_next(nb.state, extensions);
            bool complete = extensions.empty() || step == horizon;
            if (complete) remove = resolve(nb, true);
            break;
          }
          case DecodeStrategy::kFirstSentence: {
            bool complete = terminator_set.count(c.token) > 0 || step == horizon;
            if (!complete) {
              fm.get_next(nb.state, extensions);
              complete = extensions.empty();
            }
            if (complete) remove = resolve(nb, true);
            break;
          }
          case DecodeStrategy::kFreeText:
            if (step == horizon) remove = resolve(nb, true);
            break;
        }
        if (remove) {
          if (capacity[g] > 0) --capacity[g];
        } else {
          next_pool.push_back(std::move(nb));
        }
      }
      pool = std::move(next_pool);
      if (!pool.empty()) any_growing = true;
    }

    if (!any_growing) break;
  }

  // Best clue per document, then rank. Ties break toward shorter clues,
  // then lower document ids, keeping output order deterministic.
  auto final_score = [&](const Finalized& f) {
    double over = f.tokens.size() > config.l_min
                      ? static_cast<double>(f.tokens.size() - config.l_min)
                      : 0.0;
    return f.raw_sum - config.length_penalty * over;
  };

  std::unordered_map<std::uint32_t, std::size_t> best;
  for (std::size_t i = 0; i < finalized.size(); ++i) {
    auto [it, fresh] = best.try_emplace(finalized[i].doc, i);
    if (fresh) continue;
    const Finalized& cur = finalized[i];
    const Finalized& old = finalized[it->second];
    double sc = final_score(cur), so = final_score(old);
    if (sc > so || (sc == so && (cur.tokens.size() < old.tokens.size() ||
                                 (cur.tokens.size() == old.tokens.size() && i < it->second)))) {
      it->second = i;
    }
  }

  for (const auto& [doc, idx] : best) {
    const Finalized& f = finalized[idx];
    result.ranked.push_back(RankedDoc{doc, final_score(f), f.tokens});
  }
  std::sort(result.ranked.begin(), result.ranked.end(),
            [](const RankedDoc& a, const RankedDoc& b) {
              if (a.score != b.score) return a.score > b.score;
              if (a.clue.size() != b.clue.size()) return a.clue.size() < b.clue.size();
              return a.doc_id < b.doc_id;
            });
  return result;
}

}  // namespace cluedex
