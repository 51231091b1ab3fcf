#include <doctest.h>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "core/corpus.hpp"
#include "core/metrics.hpp"

namespace cluedex {
namespace {

KnowledgeBase answer_kb() {
  std::vector<RawDocument> raw;
  raw.push_back({"d0", "the capital of france is paris ."});
  raw.push_back({"d1", "berlin is the capital of germany ."});
  raw.push_back({"d2", "paris hosts the louvre museum ."});
  raw.push_back({"d3", "rome has the colosseum ."});
  raw.push_back({"d4", "madrid lies in spain ."});
  return KnowledgeBase::ingest(raw, TokenizerConfig{});
}

Query answer_query(std::string id, std::vector<std::string> answers) {
  Query q;
  q.id = std::move(id);
  q.raw_text = "q";
  q.answers = std::move(answers);
  return q;
}

Query qrels_query(std::string id, std::vector<std::uint32_t> gold) {
  Query q;
  q.id = std::move(id);
  q.raw_text = "q";
  q.gold_doc_ids = std::move(gold);
  return q;
}

TEST_SUITE("metrics") {

TEST_CASE("precision hand cases") {
  // Relevant docs {1, 3}; ranked [1, 0, 3, 2, 4] puts two of them in the
  // top five.
  std::vector<std::uint32_t> relevant = {1, 3};
  std::vector<std::uint32_t> ranked = {1, 0, 3, 2, 4};
  CHECK(precision_at_k(ranked, relevant, 5) == doctest::Approx(0.4));
  CHECK(precision_at_k(ranked, relevant, 1) == doctest::Approx(1.0));
  CHECK(precision_at_k(ranked, relevant, 2) == doctest::Approx(0.5));
  CHECK(precision_at_k(ranked, {9}, 5) == doctest::Approx(0.0));
}

TEST_CASE("short ranked lists pad with non-relevant slots") {
  // Only two results retrieved; P@5 divides by k, not by the list length.
  std::vector<std::uint32_t> ranked = {3, 1};
  CHECK(precision_at_k(ranked, {3, 1}, 5) == doctest::Approx(0.4));
  CHECK(recall_at_k(ranked, {3, 1}, 5, JudgeMode::kExplicitQrels) ==
        doctest::Approx(1.0));
  CHECK(precision_at_k({}, {3}, 5) == doctest::Approx(0.0));
  CHECK(recall_at_k({}, {3}, 5, JudgeMode::kAnswerSubstring) == doctest::Approx(0.0));
}

TEST_CASE("recall is hit@k under pseudo-relevance and a fraction under qrels") {
  std::vector<std::uint32_t> relevant = {2, 5, 7};
  std::vector<std::uint32_t> ranked = {2, 9, 5, 0, 1};
  // Pseudo-relevance: any hit in the top k counts as full recall.
  CHECK(recall_at_k(ranked, relevant, 1, JudgeMode::kAnswerSubstring) ==
        doctest::Approx(1.0));
  CHECK(recall_at_k({9, 0}, relevant, 2, JudgeMode::kAnswerSubstring) ==
        doctest::Approx(0.0));
  // Explicit qrels: fraction of the relevant set retrieved.
  CHECK(recall_at_k(ranked, relevant, 5, JudgeMode::kExplicitQrels) ==
        doctest::Approx(2.0 / 3.0));
  CHECK(recall_at_k(ranked, relevant, 1, JudgeMode::kExplicitQrels) ==
        doctest::Approx(1.0 / 3.0));
  // All three retrieved within k -> 1.0.
  CHECK(recall_at_k({2, 5, 7, 0}, relevant, 10, JudgeMode::kExplicitQrels) ==
        doctest::Approx(1.0));
}

TEST_CASE("p@1 equals r@1 when exactly one document is relevant") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint32_t> ranked(8);
    for (auto& d : ranked) d = static_cast<std::uint32_t>(rng() % 12);
    std::vector<std::uint32_t> relevant = {static_cast<std::uint32_t>(rng() % 12)};
    const double p1 = precision_at_k(ranked, relevant, 1);
    CHECK(p1 == recall_at_k(ranked, relevant, 1, JudgeMode::kAnswerSubstring));
    CHECK(p1 == recall_at_k(ranked, relevant, 1, JudgeMode::kExplicitQrels));
  }
}

TEST_CASE("metrics ignore order below the cutoff") {
  std::vector<std::uint32_t> relevant = {4, 6};
  std::vector<std::uint32_t> ranked = {4, 1, 6, 2, 3, 5, 7, 8, 9, 10};
  const std::uint32_t k = 3;
  const double p = precision_at_k(ranked, relevant, k);
  const double r = recall_at_k(ranked, relevant, k, JudgeMode::kExplicitQrels);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto shuffled = ranked;
    std::shuffle(shuffled.begin() + k, shuffled.end(), rng);
    CHECK(precision_at_k(shuffled, relevant, k) == p);
    CHECK(recall_at_k(shuffled, relevant, k, JudgeMode::kExplicitQrels) == r);
  }
}

TEST_CASE("recall never decreases as k grows") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<std::uint32_t> ranked(10);
    for (auto& d : ranked) d = static_cast<std::uint32_t>(rng() % 15);
    std::vector<std::uint32_t> relevant = {static_cast<std::uint32_t>(rng() % 15),
                                           static_cast<std::uint32_t>(rng() % 15)};
    for (JudgeMode mode : {JudgeMode::kAnswerSubstring, JudgeMode::kExplicitQrels}) {
      double prev = 0.0;
      for (std::uint32_t k = 1; k <= 12; ++k) {
        const double r = recall_at_k(ranked, relevant, k, mode);
        CHECK(r >= prev);
        CHECK(r >= 0.0);
        CHECK(r <= 1.0);
        prev = r;
      }
    }
  }
}

TEST_CASE("substring judge marks every document containing an answer") {
  const KnowledgeBase kb = answer_kb();
  const RelevanceJudge judge(kb, JudgeMode::kAnswerSubstring);
  const Query q = answer_query("q0", {"paris"});
  CHECK(judge.has_judgments(q));
  CHECK(judge.relevant(q, 0));
  CHECK(judge.relevant(q, 2));
  CHECK_FALSE(judge.relevant(q, 1));
  CHECK(judge.relevant_docs(q) == std::vector<std::uint32_t>{0, 2});

  const Query none = answer_query("q1", {});
  CHECK_FALSE(judge.has_judgments(none));
}

TEST_CASE("qrels judge uses the listed ids verbatim") {
  const KnowledgeBase kb = answer_kb();
  const RelevanceJudge judge(kb, JudgeMode::kExplicitQrels);
  const Query q = qrels_query("q0", {3, 1});
  CHECK(judge.relevant(q, 1));
  CHECK(judge.relevant(q, 3));
  CHECK_FALSE(judge.relevant(q, 0));
  auto docs = judge.relevant_docs(q);
  std::sort(docs.begin(), docs.end());
  CHECK(docs == std::vector<std::uint32_t>{1, 3});
  CHECK_FALSE(judge.has_judgments(qrels_query("q1", {})));
}

TEST_CASE("macro average over queries matches a hand computation") {
  const KnowledgeBase kb = answer_kb();
  const RelevanceJudge judge(kb, JudgeMode::kAnswerSubstring);
  const Query q0 = answer_query("q0", {"paris"});    // relevant: {0, 2}
  const Query q1 = answer_query("q1", {"berlin"});   // relevant: {1}
  const Query q2 = answer_query("q2", {"nowhere"});  // relevant: {}
  const std::vector<const Query*> queries = {&q0, &q1, &q2};
  const std::vector<std::vector<std::uint32_t>> rankings = {
      {0, 1, 2},  // q0: hits at ranks 1 and 3
      {4, 1, 3},  // q1: hit at rank 2
      {0, 1, 2},  // q2: no relevant docs exist
  };
  const MetricReport report = compute_metrics(queries, rankings, judge, {1, 2});
  CHECK(report.evaluated_queries == 3);
  // P@1: (1 + 0 + 0)/3; P@2: (1/2 + 1/2 + 0)/3.
  CHECK(report.precision.at(1) == doctest::Approx(1.0 / 3.0));
  CHECK(report.precision.at(2) == doctest::Approx(1.0 / 3.0));
  // Hit@k: q0 hits at 1 and 2; q1 only at 2.
  CHECK(report.recall.at(1) == doctest::Approx(1.0 / 3.0));
  CHECK(report.recall.at(2) == doctest::Approx(2.0 / 3.0));
  CHECK(report.per_query.size() == 3);
  CHECK(report.per_query[0].precision.at(1) == doctest::Approx(1.0));
}

TEST_CASE("queries without judging data are excluded and reported") {
  const KnowledgeBase kb = answer_kb();
  const RelevanceJudge judge(kb, JudgeMode::kExplicitQrels);
  const Query judged = qrels_query("good", {0});
  const Query blank = qrels_query("blank", {});
  const std::vector<const Query*> queries = {&judged, &blank};
  const std::vector<std::vector<std::uint32_t>> rankings = {{0}, {0}};
  const MetricReport report = compute_metrics(queries, rankings, judge, {1});
  CHECK(report.evaluated_queries == 1);
  CHECK(report.excluded_query_ids == std::vector<std::string>{"blank"});
  CHECK(report.precision.at(1) == doctest::Approx(1.0));
}

TEST_CASE("empty query set is rejected") {
  const KnowledgeBase kb = answer_kb();
  const RelevanceJudge judge(kb, JudgeMode::kAnswerSubstring);
  CHECK_THROWS_AS(compute_metrics({}, {}, judge, {1}), Error);
}

TEST_CASE("report serialization is byte-identical across reruns") {
  const KnowledgeBase kb = answer_kb();
  const RelevanceJudge judge(kb, JudgeMode::kAnswerSubstring);
  const Query q0 = answer_query("q0", {"paris"});
  const Query q1 = answer_query("q1", {"rome"});
  const std::vector<const Query*> queries = {&q0, &q1};
  const std::vector<std::vector<std::uint32_t>> rankings = {{2, 0}, {3, 4}};
  MetricReport a = compute_metrics(queries, rankings, judge, {1, 5});
  MetricReport b = compute_metrics(queries, rankings, judge, {1, 5});
  a.config_hash = b.config_hash = "cfg";
  a.index_hash = b.index_hash = "idx";
  CHECK(a.to_json() == b.to_json());
  CHECK(a.to_json().find("\"cfg\"") != std::string::npos);
  CHECK_FALSE(a.to_table().empty());
}

TEST_CASE("mode names round-trip") {
  CHECK(parse_judge_mode("answer_substring") == JudgeMode::kAnswerSubstring);
  CHECK(parse_judge_mode("explicit_qrels") == JudgeMode::kExplicitQrels);
  CHECK(judge_mode_name(JudgeMode::kAnswerSubstring) == "answer_substring");
  CHECK(judge_mode_name(JudgeMode::kExplicitQrels) == "explicit_qrels");
  CHECK_THROWS_AS(parse_judge_mode("fuzzy"), Error);
}

}  // TEST_SUITE

}  // namespace
}  // namespace cluedex
