#include "core/synthetic.hpp"

#include <random>

namespace cluedex::synthetic {

namespace {

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

}  // namespace

SyntheticSet planted_clue_set(std::uint32_t num_docs, std::uint32_t filler_tokens,
                              std::uint32_t clue_len, std::uint64_t seed) {
  if (num_docs == 0 || clue_len == 0)
    throw_error(ErrorCode::kInvalidArgument, "empty synthetic set");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> filler(0, 199);

  SyntheticSet set;
  for (std::uint32_t d = 0; d < num_docs; ++d) {
    std::vector<std::string> clue_words;
    for (std::uint32_t j = 0; j < clue_len; ++j)
      clue_words.push_back("key" + std::to_string(d) + "x" + std::to_string(j));

    std::vector<std::string> words;
    for (std::uint32_t t = 0; t < filler_tokens; ++t)
      words.push_back("fill" + std::to_string(filler(rng)));
    const std::size_t at =
        words.empty() ? 0 : rng() % (words.size() + 1);
    words.insert(words.begin() + static_cast<std::ptrdiff_t>(at), clue_words.begin(),
                 clue_words.end());
    words.push_back(".");
    set.docs.push_back({"doc " + std::to_string(d), join(words)});

    SyntheticQuery q;
    q.id = std::to_string(d);
    q.text = "locate entry " + std::to_string(d);
    q.gold_doc_ids = {d};
    q.clue_text = join(clue_words);
    set.queries.push_back(std::move(q));
  }
  return set;
}

SyntheticSet topic_set(std::uint32_t num_docs, std::uint32_t num_queries,
                       bool shared_first_sentence, std::uint64_t seed) {
  if (num_docs == 0 || num_queries == 0 || num_queries > num_docs)
    throw_error(ErrorCode::kInvalidArgument, "bad synthetic topic shape");
  std::mt19937_64 rng(seed);
  constexpr std::uint32_t kTopicWords = 6;
  // The filler vocabulary grows with the corpus so a shared word stays about
  // as frequent as a topic word (~3 occurrences each); with a fixed small
  // vocabulary, filler would swamp the topics at thousand-document scale no
  // matter how strong the query-affinity signal is.
  const std::uint32_t filler_vocab = std::max(100u, kTopicWords * num_docs);
  std::uniform_int_distribution<std::uint32_t> filler(0, filler_vocab - 1);

  SyntheticSet set;
  for (std::uint32_t d = 0; d < num_docs; ++d) {
    std::vector<std::string> topic;
    for (std::uint32_t j = 0; j < kTopicWords; ++j)
      topic.push_back("topic" + std::to_string(d) + "w" + std::to_string(j));

    std::vector<std::string> words;
    if (shared_first_sentence) {
      // Kept short: each shared word is num_docs times more frequent than any
      // topic word, so a long boilerplate sentence would claim every step-0
      // beam slot and starve the topic runs out of the decode entirely.
      for (const char* w : {"collection", "starts", "here", "."})
        words.push_back(w);
    } else {
      words.push_back("entry" + std::to_string(d));
      words.push_back("opens");
      words.push_back("here");
      words.push_back(".");
    }
    // Three body sentences, each interleaving filler with the topic run so
    // the topic words form contiguous unique substrings.
    for (std::uint32_t s = 0; s < 3; ++s) {
      for (std::uint32_t t = 0; t < 4; ++t)
        words.push_back("common" + std::to_string(filler(rng)));
      for (std::uint32_t j = 0; j < kTopicWords; ++j) words.push_back(topic[j]);
      for (std::uint32_t t = 0; t < 3; ++t)
        words.push_back("common" + std::to_string(filler(rng)));
      words.push_back(".");
    }
    set.docs.push_back({"doc " + std::to_string(d), join(words)});

    if (d < num_queries) {
      SyntheticQuery q;
      q.id = std::to_string(d);
      q.text = topic[0] + " " + topic[1] + " " + topic[2] + " " + topic[3];
      q.gold_doc_ids = {d};
      set.queries.push_back(std::move(q));
    }
  }
  return set;
}

std::vector<RawDocument> random_docs(std::uint32_t num_docs, std::uint32_t tokens_per_doc,
                                     std::uint32_t vocab_words, std::uint64_t seed) {
  if (num_docs == 0 || tokens_per_doc == 0 || vocab_words == 0)
    throw_error(ErrorCode::kInvalidArgument, "empty synthetic corpus");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> pick(0, vocab_words - 1);
  std::vector<RawDocument> docs;
  docs.reserve(num_docs);
  for (std::uint32_t d = 0; d < num_docs; ++d) {
    std::vector<std::string> words;
    words.reserve(tokens_per_doc + tokens_per_doc / 15 + 1);
    for (std::uint32_t t = 0; t < tokens_per_doc; ++t) {
      words.push_back("v" + std::to_string(pick(rng)));
      if (t % 15 == 14) words.push_back(".");
    }
    if (words.back() != ".") words.push_back(".");
    docs.push_back({"doc " + std::to_string(d), join(words)});
  }
  return docs;
}

std::vector<Query> materialize_queries(const SyntheticSet& set, const KnowledgeBase& kb) {
  std::vector<Query> queries;
  queries.reserve(set.queries.size());
  for (const SyntheticQuery& sq : set.queries) {
    Query q;
    q.id = sq.id;
    q.raw_text = sq.text;
    q.text_tokens = kb.tokenizer().tokenize_frozen(sq.text);
    q.gold_doc_ids = sq.gold_doc_ids;
    if (!sq.clue_text.empty())
      q.oracle_clue = kb.tokenizer().tokenize_frozen(sq.clue_text);
    queries.push_back(std::move(q));
  }
  return queries;
}

}  // namespace cluedex::synthetic
