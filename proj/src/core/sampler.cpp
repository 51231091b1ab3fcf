#include "core/sampler.hpp"

#include <algorithm>
#include <cmath>

namespace cluedex {

void SamplerConfig::validate() const {
  if (rho <= 0.0) throw_error(ErrorCode::kConfig, "sampler rho must be > 0");
  if (n < 1) throw_error(ErrorCode::kConfig, "sampler span window n must be >= 1");
  if (m < 1) throw_error(ErrorCode::kConfig, "sampler clues per document m must be >= 1");
  if (l < 1) throw_error(ErrorCode::kConfig, "sampler clue length l must be >= 1");
}

std::vector<SentenceRange> split_sentences(const Document& doc, const Tokenizer& tokenizer) {
  if (doc.tokens.empty()) {
    throw_error(ErrorCode::kInvalidArgument, "cannot split an empty document");
  }
  std::vector<SentenceRange> out;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    const std::string text = tokenizer.token_text(doc.tokens[i]);
    bool terminator = text == "." || text == "!" || text == "?";
    if (terminator) {
      out.push_back(SentenceRange{begin, i + 1});
      begin = i + 1;
    }
  }
  if (begin < doc.tokens.size()) out.push_back(SentenceRange{begin, doc.tokens.size()});
  return out;
}

std::uint32_t keyword_hits(const Document& doc, std::size_t begin, std::size_t end,
                           const std::vector<TokenId>& keywords) {
  std::uint32_t hits = 0;
  for (TokenId k : keywords) {
    for (std::size_t i = begin; i < end; ++i) {
      if (doc.tokens[i] == k) {
        ++hits;
        break;
      }
    }
  }
  return hits;
}

std::vector<SpanCandidate> span_distribution(const Document& doc, const Tokenizer& tokenizer,
                                             const std::vector<TokenId>& keywords,
                                             const SamplerConfig& config) {
  config.validate();
  std::vector<SentenceRange> sentences = split_sentences(doc, tokenizer);

  std::vector<std::uint32_t> sentence_hits(sentences.size());
  std::uint32_t best = 0;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    sentence_hits[s] = keyword_hits(doc, sentences[s].begin, sentences[s].end, keywords);
    best = std::max(best, sentence_hits[s]);
  }

  std::vector<SpanCandidate> candidates;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    if (sentence_hits[s] != best) continue;
    const SentenceRange& range = sentences[s];
    std::size_t sent_len = range.end - range.begin;
    std::size_t window = std::min<std::size_t>(config.n, sent_len);
    for (std::size_t i = range.begin; i + window <= range.end; ++i) {
      SpanCandidate c;
      c.sentence_index = s;
      c.start = i;
      c.length = window;
      c.hits = keyword_hits(doc, i, i + window, keywords);
      c.pi = c.hits / (c.hits + config.rho);
      candidates.push_back(c);
    }
  }

  // Softmax over pi; max-shifted for stability.
  double max_pi = 0.0;
  for (const auto& c : candidates) max_pi = std::max(max_pi, c.pi);
  double z = 0.0;
  for (auto& c : candidates) z += std::exp(c.pi - max_pi);
  for (auto& c : candidates) c.prob = std::exp(c.pi - max_pi) / z;
  return candidates;
}

std::vector<SampledClue> sample_clues(const Document& doc, const Tokenizer& tokenizer,
                                      const std::vector<TokenId>& keywords,
                                      const SamplerConfig& config, std::mt19937_64& rng) {
  std::vector<SpanCandidate> candidates = span_distribution(doc, tokenizer, keywords, config);

  std::vector<double> cdf(candidates.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    acc += candidates[i].prob;
    cdf[i] = acc;
  }
  cdf.back() = 1.0;  // close the tail against rounding

  std::vector<SampledClue> out;
  out.reserve(config.m);
  for (std::uint32_t draw = 0; draw < config.m; ++draw) {
    double u = uniform_unit(rng);
    std::size_t pick = std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
    if (pick >= candidates.size()) pick = candidates.size() - 1;
    const SpanCandidate& c = candidates[pick];

    SampledClue clue;
    clue.start = c.start;
    clue.sentence_index = c.sentence_index;
    std::size_t end = std::min<std::size_t>(c.start + config.l, doc.tokens.size());
    clue.tokens.assign(doc.tokens.begin() + c.start, doc.tokens.begin() + end);
    out.push_back(std::move(clue));
  }
  return out;
}

}  // namespace cluedex
