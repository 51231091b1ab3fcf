#include "core/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include <json.hpp>

namespace cluedex {

using nlohmann::ordered_json;

JudgeMode parse_judge_mode(const std::string& name) {
  if (name == "answer_substring") return JudgeMode::kAnswerSubstring;
  if (name == "explicit_qrels") return JudgeMode::kExplicitQrels;
  throw_error(ErrorCode::kConfig, "unknown judge mode: " + name);
}

std::string judge_mode_name(JudgeMode mode) {
  return mode == JudgeMode::kAnswerSubstring ? "answer_substring" : "explicit_qrels";
}

RelevanceJudge::RelevanceJudge(const KnowledgeBase& kb, JudgeMode mode)
    : kb_(&kb), mode_(mode) {}

bool RelevanceJudge::has_judgments(const Query& query) const {
  if (mode_ == JudgeMode::kExplicitQrels) return !query.gold_doc_ids.empty();
  return !query.answers.empty();
}

bool RelevanceJudge::relevant(const Query& query, std::uint32_t doc_id) const {
  if (mode_ == JudgeMode::kExplicitQrels) {
    return std::find(query.gold_doc_ids.begin(), query.gold_doc_ids.end(), doc_id) !=
           query.gold_doc_ids.end();
  }
  if (doc_id >= kb_->size()) return false;
  const std::string& text = kb_->doc(doc_id).raw_text;
  for (const std::string& answer : query.answers) {
    std::string needle = kb_->tokenizer().normalize(answer);
    if (!needle.empty() && text.find(needle) != std::string::npos) return true;
  }
  return false;
}

std::vector<std::uint32_t> RelevanceJudge::relevant_docs(const Query& query) const {
  std::vector<std::uint32_t> out;
  if (mode_ == JudgeMode::kExplicitQrels) {
    out = query.gold_doc_ids;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
  for (std::uint32_t d = 0; d < kb_->size(); ++d) {
    if (relevant(query, d)) out.push_back(d);
  }
  return out;
}

double precision_at_k(const std::vector<std::uint32_t>& ranked,
                      const std::vector<std::uint32_t>& relevant, std::uint32_t k) {
  if (k < 1) throw_error(ErrorCode::kInvalidArgument, "k must be >= 1");
  std::set<std::uint32_t> rel(relevant.begin(), relevant.end());
  std::uint32_t hits = 0;
  for (std::uint32_t i = 0; i < k && i < ranked.size(); ++i) {
    if (rel.count(ranked[i])) ++hits;
  }
  return static_cast<double>(hits) / k;
}

double recall_at_k(const std::vector<std::uint32_t>& ranked,
                   const std::vector<std::uint32_t>& relevant, std::uint32_t k,
                   JudgeMode mode) {
  if (k < 1) throw_error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (relevant.empty()) return 0.0;
  std::set<std::uint32_t> rel(relevant.begin(), relevant.end());
  // Distinct relevant documents retrieved: a doc repeated in the ranking
  // counts once, keeping recall within [0, 1].
  std::set<std::uint32_t> hit;
  for (std::uint32_t i = 0; i < k && i < ranked.size(); ++i) {
    if (rel.count(ranked[i])) hit.insert(ranked[i]);
  }
  if (mode == JudgeMode::kAnswerSubstring) return hit.empty() ? 0.0 : 1.0;
  return static_cast<double>(hit.size()) / static_cast<double>(rel.size());
}

MetricReport compute_metrics(const std::vector<const Query*>& queries,
                             const std::vector<std::vector<std::uint32_t>>& rankings,
                             const RelevanceJudge& judge,
                             const std::vector<std::uint32_t>& ks) {
  if (queries.empty()) throw_error(ErrorCode::kInvalidArgument, "no queries to evaluate");
  if (queries.size() != rankings.size()) {
    throw_error(ErrorCode::kInvalidArgument, "queries and rankings differ in length");
  }
  if (ks.empty()) throw_error(ErrorCode::kInvalidArgument, "no cutoffs requested");

  MetricReport report;
  report.ks = ks;
  std::sort(report.ks.begin(), report.ks.end());
  report.ks.erase(std::unique(report.ks.begin(), report.ks.end()), report.ks.end());
  report.judge_mode = judge_mode_name(judge.mode());

  for (std::uint32_t k : report.ks) {
    report.precision[k] = 0.0;
    report.recall[k] = 0.0;
  }

  for (std::size_t i = 0; i < queries.size(); ++i) {
    const Query& q = *queries[i];
    if (!judge.has_judgments(q)) {
      report.excluded_query_ids.push_back(q.id);
      continue;
    }
    std::vector<std::uint32_t> relevant = judge.relevant_docs(q);
    QueryMetrics qm;
    qm.query_id = q.id;
    for (std::uint32_t k : report.ks) {
      qm.precision[k] = precision_at_k(rankings[i], relevant, k);
      qm.recall[k] = recall_at_k(rankings[i], relevant, k, judge.mode());
      report.precision[k] += qm.precision[k];
      report.recall[k] += qm.recall[k];
    }
    report.per_query.push_back(std::move(qm));
    ++report.evaluated_queries;
  }

  if (report.evaluated_queries == 0) {
    throw_error(ErrorCode::kInvalidArgument, "no query carries judging data");
  }
  for (std::uint32_t k : report.ks) {
    report.precision[k] /= static_cast<double>(report.evaluated_queries);
    report.recall[k] /= static_cast<double>(report.evaluated_queries);
  }
  return report;
}

std::string MetricReport::to_json() const {
  ordered_json j;
  j["judge_mode"] = judge_mode;
  j["config_hash"] = config_hash;
  j["index_hash"] = index_hash;
  j["evaluated_queries"] = evaluated_queries;
  j["excluded_query_ids"] = excluded_query_ids;

  ordered_json metrics;
  for (std::uint32_t k : ks) {
    metrics["P@" + std::to_string(k)] = precision.at(k);
    metrics["R@" + std::to_string(k)] = recall.at(k);
  }
  j["metrics"] = metrics;

  if (!extra.empty()) {
    ordered_json e;
    for (const auto& [key, value] : extra) e[key] = value;
    j["extra"] = e;
  }

  ordered_json pq = ordered_json::array();
  for (const auto& q : per_query) {
    ordered_json row;
    row["query_id"] = q.query_id;
    for (std::uint32_t k : ks) {
      row["P@" + std::to_string(k)] = q.precision.at(k);
      row["R@" + std::to_string(k)] = q.recall.at(k);
    }
    pq.push_back(row);
  }
  j["per_query"] = pq;
  return j.dump(2);
}

std::string MetricReport::to_table() const {
  std::string out;
  char buf[64];
  out += "metric   ";
  for (std::uint32_t k : ks) {
    std::snprintf(buf, sizeof(buf), "  P@%-5u", k);
    out += buf;
  }
  for (std::uint32_t k : ks) {
    std::snprintf(buf, sizeof(buf), "  R@%-5u", k);
    out += buf;
  }
  out += "\n";
  out += "macro    ";
  for (std::uint32_t k : ks) {
    std::snprintf(buf, sizeof(buf), "  %7.4f", precision.at(k));
    out += buf;
  }
  for (std::uint32_t k : ks) {
    std::snprintf(buf, sizeof(buf), "  %7.4f", recall.at(k));
    out += buf;
  }
  out += "\n";
  return out;
}

}  // namespace cluedex
