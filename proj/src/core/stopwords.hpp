#pragma once

#include <string>
#include <unordered_set>
#include <vector>

#include "core/common.hpp"
#include "core/tokenizer.hpp"

namespace cluedex {

// Built-in English stopword list; override replaces it wholesale.
const std::unordered_set<std::string>& default_stopwords();

std::unordered_set<std::string> load_stopwords(const std::string& path);

// Query tokens minus stopwords and punctuation, deduplicated, order of
// first appearance. This is the keyword set used both for clue sampling
// and for the scorer's query-affinity bonus.
std::vector<TokenId> query_keywords(const std::vector<TokenId>& query_tokens,
                                    const Tokenizer& tokenizer,
                                    const std::unordered_set<std::string>& stopwords);

}  // namespace cluedex
