#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/corpus.hpp"

namespace cluedex {

enum class JudgeMode : std::uint8_t {
  kAnswerSubstring = 0,  // relevant iff the document contains a gold answer string
  kExplicitQrels = 1,    // relevant iff listed in the query's gold_doc_ids
};

JudgeMode parse_judge_mode(const std::string& name);
std::string judge_mode_name(JudgeMode mode);

// Deterministic relevance judgments against the knowledge base. In
// answer-substring mode a query is treated as single-relevance
// pseudo-judged: recall@k collapses to hit@k.
class RelevanceJudge {
 public:
  RelevanceJudge(const KnowledgeBase& kb, JudgeMode mode);

  bool has_judgments(const Query& query) const;
  bool relevant(const Query& query, std::uint32_t doc_id) const;

  // Known relevant documents: qrels list, or every KB document containing
  // an answer in substring mode.
  std::vector<std::uint32_t> relevant_docs(const Query& query) const;

  JudgeMode mode() const { return mode_; }

 private:
  const KnowledgeBase* kb_;
  JudgeMode mode_;
};

// P@K over a ranked list; missing tail slots count as non-relevant.
double precision_at_k(const std::vector<std::uint32_t>& ranked,
                      const std::vector<std::uint32_t>& relevant, std::uint32_t k);

// R@K: hit@K for pseudo-relevance (binary per query), fraction of relevant
// retrieved for explicit qrels.
double recall_at_k(const std::vector<std::uint32_t>& ranked,
                   const std::vector<std::uint32_t>& relevant, std::uint32_t k,
                   JudgeMode mode);

struct QueryMetrics {
  std::string query_id;
  std::map<std::uint32_t, double> precision;  // k -> value
  std::map<std::uint32_t, double> recall;
};

struct MetricReport {
  std::vector<std::uint32_t> ks;
  std::map<std::uint32_t, double> precision;  // macro-averaged
  std::map<std::uint32_t, double> recall;
  std::vector<QueryMetrics> per_query;
  std::vector<std::string> excluded_query_ids;  // no judging data
  std::uint64_t evaluated_queries = 0;
  std::string judge_mode;
  std::string config_hash;
  std::string index_hash;
  std::map<std::string, std::string> extra;  // strategy rows etc.

  std::string to_json() const;   // stable key order, byte-identical reruns
  std::string to_table() const;  // fixed-width text
};

// Macro-averaged metrics over (query, ranked docs) pairs. Queries without
// judging data are excluded and listed. Throws on an empty query set.
MetricReport compute_metrics(const std::vector<const Query*>& queries,
                             const std::vector<std::vector<std::uint32_t>>& rankings,
                             const RelevanceJudge& judge, const std::vector<std::uint32_t>& ks);

}  // namespace cluedex
