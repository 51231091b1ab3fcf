#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/binio.hpp"
#include "core/common.hpp"

namespace cluedex {

enum class TokenizerMode : std::uint8_t { kByte = 0, kWord = 1 };

struct TokenizerConfig {
  TokenizerMode mode = TokenizerMode::kWord;
  bool lowercase = true;
};

// Deterministic tokenizer over normalized text.
//
// Normalization lowercases ASCII (when enabled) and, in word mode, detaches
// punctuation into single-character tokens and collapses whitespace. Input is
// expected to already be NFC UTF-8; non-ASCII bytes pass through untouched.
// Word mode splits on whitespace and maps each word to a dense TokenId;
// byte mode maps each byte b of the normalized text to TokenId b + 2.
//
// Ids 0 (SEP) and 1 (UNK) are reserved: tokenization never produces SEP, and
// UNK is only produced for out-of-vocabulary words once the vocabulary is
// frozen. tokenize/detokenize round-trip exactly on normalized text.
class Tokenizer {
 public:
  Tokenizer() = default;
  explicit Tokenizer(const TokenizerConfig& config);

  std::string normalize(const std::string& text) const;

  // Grows the vocabulary in word mode until freeze() is called; after that
  // unknown words map to kUnkToken.
  std::vector<TokenId> tokenize(const std::string& text);
  std::vector<TokenId> tokenize_frozen(const std::string& text) const;

  std::string detokenize(const std::vector<TokenId>& tokens) const;
  std::string token_text(TokenId id) const;

  // Id for an already-normalized single token string; kUnkToken when absent.
  TokenId lookup(const std::string& token) const;

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  TokenizerMode mode() const { return config_.mode; }
  bool lowercase() const { return config_.lowercase; }
  std::uint32_t vocab_size() const;

  void save(BinaryWriter& w) const;
  static Tokenizer load(BinaryReader& r);

  bool operator==(const Tokenizer& other) const;

 private:
  std::vector<std::string> split_words(const std::string& normalized) const;
  std::vector<TokenId> map_words(const std::vector<std::string>& words, bool allow_new);

  TokenizerConfig config_;
  bool frozen_ = false;
  std::vector<std::string> words_;  // id - kFirstRealToken -> word
  std::unordered_map<std::string, TokenId> word_ids_;
};

}  // namespace cluedex
