#include "core/tokenizer.hpp"

#include <cctype>

namespace cluedex {

namespace {

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_punct(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return u < 128 && std::ispunct(u);
}

char lower_ascii(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

}  // namespace

Tokenizer::Tokenizer(const TokenizerConfig& config) : config_(config) {}

std::string Tokenizer::normalize(const std::string& text) const {
  std::string lowered;
  lowered.reserve(text.size());
  for (char c : text) {
    lowered.push_back(config_.lowercase ? lower_ascii(c) : c);
  }
  if (config_.mode == TokenizerMode::kByte) return lowered;

  // Word mode: the canonical normalized form is the token stream joined by
  // single spaces, so detokenize(tokenize(x)) == x holds by construction.
  std::string out;
  out.reserve(lowered.size());
  for (const auto& w : split_words(lowered)) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

std::vector<std::string> Tokenizer::split_words(const std::string& normalized) const {
  std::vector<std::string> words;
  std::string cur;
  for (char c : normalized) {
    if (is_ascii_space(c)) {
      if (!cur.empty()) words.push_back(std::move(cur)), cur.clear();
    } else if (is_ascii_punct(c)) {
      if (!cur.empty()) words.push_back(std::move(cur)), cur.clear();
      words.emplace_back(1, c);
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

std::vector<TokenId> Tokenizer::map_words(const std::vector<std::string>& words,
                                          bool allow_new) {
  std::vector<TokenId> out;
  out.reserve(words.size());
  for (const auto& w : words) {
    auto it = word_ids_.find(w);
    if (it != word_ids_.end()) {
      out.push_back(it->second);
    } else if (allow_new) {
      TokenId id = kFirstRealToken + static_cast<TokenId>(words_.size());
      words_.push_back(w);
      word_ids_.emplace(w, id);
      out.push_back(id);
    } else {
      out.push_back(kUnkToken);
    }
  }
  return out;
}

std::vector<TokenId> Tokenizer::tokenize(const std::string& text) {
  std::string norm = normalize(text);
  if (config_.mode == TokenizerMode::kByte) {
    std::vector<TokenId> out;
    out.reserve(norm.size());
    for (char c : norm) {
      out.push_back(kFirstRealToken + static_cast<unsigned char>(c));
    }
    return out;
  }
  return map_words(split_words(norm), !frozen_);
}

std::vector<TokenId> Tokenizer::tokenize_frozen(const std::string& text) const {
  std::string norm = normalize(text);
  if (config_.mode == TokenizerMode::kByte) {
    std::vector<TokenId> out;
    out.reserve(norm.size());
    for (char c : norm) {
      out.push_back(kFirstRealToken + static_cast<unsigned char>(c));
    }
    return out;
  }
  std::vector<TokenId> out;
  for (const auto& w : split_words(norm)) {
    auto it = word_ids_.find(w);
    out.push_back(it == word_ids_.end() ? kUnkToken : it->second);
  }
  return out;
}

std::string Tokenizer::token_text(TokenId id) const {
  if (id == kSepToken) return "<sep>";
  if (id == kUnkToken) return "<unk>";
  if (config_.mode == TokenizerMode::kByte) {
    if (id - kFirstRealToken > 255) {
      throw_error(ErrorCode::kInvalidArgument, "byte token id out of range");
    }
    return std::string(1, static_cast<char>(id - kFirstRealToken));
  }
  std::size_t idx = id - kFirstRealToken;
  if (idx >= words_.size()) {
    throw_error(ErrorCode::kInvalidArgument,
                "token id " + std::to_string(id) + " out of vocabulary");
  }
  return words_[idx];
}

std::string Tokenizer::detokenize(const std::vector<TokenId>& tokens) const {
  std::string out;
  if (config_.mode == TokenizerMode::kByte) {
    out.reserve(tokens.size());
    for (TokenId t : tokens) out += token_text(t);
    return out;
  }
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += token_text(tokens[i]);
  }
  return out;
}

TokenId Tokenizer::lookup(const std::string& token) const {
  if (config_.mode == TokenizerMode::kByte) {
    if (token.size() != 1) return kUnkToken;
    return kFirstRealToken + static_cast<unsigned char>(token[0]);
  }
  auto it = word_ids_.find(token);
  return it == word_ids_.end() ? kUnkToken : it->second;
}

std::uint32_t Tokenizer::vocab_size() const {
  if (config_.mode == TokenizerMode::kByte) return kFirstRealToken + 256;
  return kFirstRealToken + static_cast<std::uint32_t>(words_.size());
}

void Tokenizer::save(BinaryWriter& w) const {
  w.u8(static_cast<std::uint8_t>(config_.mode));
  w.u8(config_.lowercase ? 1 : 0);
  w.u8(frozen_ ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(words_.size()));
  for (const auto& word : words_) w.str(word);
}

Tokenizer Tokenizer::load(BinaryReader& r) {
  TokenizerConfig cfg;
  cfg.mode = static_cast<TokenizerMode>(r.u8());
  cfg.lowercase = r.u8() != 0;
  Tokenizer t(cfg);
  t.frozen_ = r.u8() != 0;
  std::uint32_t n = r.u32();
  t.words_.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string word = r.str();
    t.word_ids_.emplace(word, kFirstRealToken + static_cast<TokenId>(t.words_.size()));
    t.words_.push_back(std::move(word));
  }
  return t;
}

bool Tokenizer::operator==(const Tokenizer& other) const {
  return config_.mode == other.config_.mode &&
         config_.lowercase == other.config_.lowercase && words_ == other.words_;
}

}  // namespace cluedex
