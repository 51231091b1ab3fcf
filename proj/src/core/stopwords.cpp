#include "core/stopwords.hpp"

#include <cctype>
#include <fstream>

namespace cluedex {

const std::unordered_set<std::string>& default_stopwords() {
  static const std::unordered_set<std::string> words = {
      "a",     "an",    "and",   "are",   "as",    "at",    "be",    "but",
      "by",    "for",   "from",  "had",   "has",   "have",  "he",    "her",
      "his",   "i",     "if",    "in",    "is",    "it",    "its",
      "no",    "not",   "of",    "on",    "or",    "our",   "she",   "so",
      "that",  "the",   "their", "them",  "then",  "there", "these", "they",
      "this",  "to",    "was",   "we",    "were",  "what",  "when",  "where",
      "which", "who",   "will",  "with",  "you",   "your",  "do",    "does",
      "did",   "how",   "why",   "can",   "could", "would", "should",
  };
  return words;
}

std::unordered_set<std::string> load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorCode::kIo, "cannot open stopword list: " + path);
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) words.insert(line);
  }
  return words;
}

namespace {

bool is_punct_token(const std::string& text) {
  for (char c : text) {
    if (!std::ispunct(static_cast<unsigned char>(c))) return false;
  }
  return !text.empty();
}

}  // namespace

std::vector<TokenId> query_keywords(const std::vector<TokenId>& query_tokens,
                                    const Tokenizer& tokenizer,
                                    const std::unordered_set<std::string>& stopwords) {
  std::vector<TokenId> out;
  std::unordered_set<TokenId> seen;
  for (TokenId t : query_tokens) {
    if (t == kSepToken || t == kUnkToken) continue;
    if (seen.count(t)) continue;
    std::string text = tokenizer.token_text(t);
    if (stopwords.count(text) || is_punct_token(text)) continue;
    seen.insert(t);
    out.push_back(t);
  }
  return out;
}

}  // namespace cluedex
