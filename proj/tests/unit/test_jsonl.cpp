#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/corpus.hpp"
#include "core/jsonl.hpp"

namespace cluedex {
namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& contents = "") {
    static int counter = 0;
    path = "cluedex_jsonl_test_" + std::to_string(counter++) + ".jsonl";
    std::ofstream out(path, std::ios::trunc);
    out << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

KnowledgeBase tiny_kb() {
  std::vector<RawDocument> raw;
  raw.push_back({"a", "alpha beta gamma ."});
  raw.push_back({"b", "delta epsilon zeta ."});
  return KnowledgeBase::ingest(raw, TokenizerConfig{});
}

ErrorCode thrown_code(const std::function<void()>& fn, std::string* message = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  FAIL("expected a typed error");
  return ErrorCode::kRuntime;
}

TEST_SUITE("jsonl") {

TEST_CASE("corpus reader accepts titles, skips blank lines") {
  TempFile file(
      "{\"title\": \"first\", \"text\": \"alpha beta\"}\n"
      "\n"
      "{\"text\": \"gamma\"}\n");
  const std::vector<RawDocument> docs = read_corpus_jsonl(file.path);
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].title == "first");
  CHECK(docs[0].text == "alpha beta");
  CHECK(docs[1].title.empty());
  CHECK(docs[1].text == "gamma");
}

TEST_CASE("corpus reader cites the offending line") {
  std::string message;

  TempFile bad_json("{\"text\": \"ok\"}\nnot json at all\n");
  CHECK(thrown_code([&] { read_corpus_jsonl(bad_json.path); }, &message) ==
        ErrorCode::kFormat);
  CHECK(message.find(":2:") != std::string::npos);

  TempFile no_text("{\"title\": \"x\"}\n");
  CHECK(thrown_code([&] { read_corpus_jsonl(no_text.path); }, &message) ==
        ErrorCode::kFormat);
  CHECK(message.find(":1:") != std::string::npos);

  TempFile not_object("[1, 2, 3]\n");
  CHECK(thrown_code([&] { read_corpus_jsonl(not_object.path); }) == ErrorCode::kFormat);

  CHECK(thrown_code([] { read_corpus_jsonl("absent_file.jsonl"); }) == ErrorCode::kIo);
}

TEST_CASE("query reader tokenizes against the frozen vocabulary") {
  const KnowledgeBase kb = tiny_kb();
  TempFile file(
      "{\"id\": \"q1\", \"text\": \"alpha zeta\", \"answers\": [\"beta\"],"
      " \"gold_doc_ids\": [0, 1], \"feature\": [0.5, -1.0]}\n"
      "{\"id\": 7, \"text\": \"delta\", \"oracle_clue\": \"delta epsilon\"}\n");
  const std::vector<Query> queries = read_queries_jsonl(file.path, kb.tokenizer());
  REQUIRE(queries.size() == 2);
  CHECK(queries[0].id == "q1");
  CHECK(queries[0].text_tokens == kb.tokenizer().tokenize_frozen("alpha zeta"));
  CHECK(queries[0].answers == std::vector<std::string>{"beta"});
  CHECK(queries[0].gold_doc_ids == std::vector<std::uint32_t>{0, 1});
  CHECK(queries[0].feature == std::vector<double>{0.5, -1.0});
  CHECK(queries[0].oracle_clue.empty());
  // Integer ids are accepted and stringified.
  CHECK(queries[1].id == "7");
  CHECK(queries[1].oracle_clue == kb.tokenizer().tokenize_frozen("delta epsilon"));
}

TEST_CASE("query reader rejects malformed rows") {
  const KnowledgeBase kb = tiny_kb();
  std::string message;

  TempFile no_id("{\"text\": \"alpha\"}\n");
  CHECK(thrown_code([&] { read_queries_jsonl(no_id.path, kb.tokenizer()); }) ==
        ErrorCode::kFormat);

  TempFile empty_text("{\"id\": \"q\", \"text\": \"\"}\n");
  CHECK(thrown_code([&] { read_queries_jsonl(empty_text.path, kb.tokenizer()); },
                    &message) == ErrorCode::kFormat);
  CHECK(message.find("no tokens") != std::string::npos);

  TempFile bad_answers("{\"id\": \"q\", \"text\": \"alpha\", \"answers\": [3]}\n");
  CHECK(thrown_code([&] { read_queries_jsonl(bad_answers.path, kb.tokenizer()); }) ==
        ErrorCode::kFormat);

  TempFile bad_gold(
      "{\"id\": \"q\", \"text\": \"alpha\", \"gold_doc_ids\": [\"zero\"]}\n");
  CHECK(thrown_code([&] { read_queries_jsonl(bad_gold.path, kb.tokenizer()); }) ==
        ErrorCode::kFormat);

  TempFile bad_id("{\"id\": [1], \"text\": \"alpha\"}\n");
  CHECK(thrown_code([&] { read_queries_jsonl(bad_id.path, kb.tokenizer()); }) ==
        ErrorCode::kFormat);
}

TEST_CASE("clue records survive a write/read round trip") {
  TempFile file;
  std::vector<ClueRecord> clues;
  clues.push_back({"q0", 3, {5, 6, 7}, "five six seven", 12, 2});
  clues.push_back({"q1", 0, {2}, "two", 0, 0});
  write_clues_jsonl(file.path, clues);
  const std::vector<ClueRecord> back = read_clues_jsonl(file.path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].query_id == "q0");
  CHECK(back[0].doc_id == 3);
  CHECK(back[0].clue_tokens == std::vector<TokenId>{5, 6, 7});
  CHECK(back[0].clue_text == "five six seven");
  CHECK(back[0].start == 12);
  CHECK(back[0].sentence_index == 2);
  CHECK(back[1].clue_tokens == std::vector<TokenId>{2});
}

TEST_CASE("results survive a round trip with hashes and diagnostics") {
  TempFile file;
  ResultsFile results;
  results.config_hash = "00000000deadbeef";
  results.index_hash = "cafe000000000000";
  ResultRecord r0;
  r0.query_id = "q0";
  r0.ranked.push_back({4, -3.25, "some clue"});
  r0.ranked.push_back({1, -7.5, ""});
  r0.diagnostics.finalized = 3;
  r0.diagnostics.dropped_ambiguous = 1;
  r0.diagnostics.dead_ends = 2;
  r0.diagnostics.discarded_absent = 5;
  ResultRecord r1;
  r1.query_id = "q1";  // empty ranked list stays empty
  results.records = {r0, r1};
  write_results_jsonl(file.path, results);

  const ResultsFile back = read_results_jsonl(file.path);
  CHECK(back.config_hash == "00000000deadbeef");
  CHECK(back.index_hash == "cafe000000000000");
  REQUIRE(back.records.size() == 2);
  CHECK(back.records[0].query_id == "q0");
  REQUIRE(back.records[0].ranked.size() == 2);
  CHECK(back.records[0].ranked[0].doc_id == 4);
  CHECK(back.records[0].ranked[0].score == -3.25);
  CHECK(back.records[0].ranked[0].clue_text == "some clue");
  CHECK(back.records[0].diagnostics.finalized == 3);
  CHECK(back.records[0].diagnostics.dropped_ambiguous == 1);
  CHECK(back.records[0].diagnostics.dead_ends == 2);
  CHECK(back.records[0].diagnostics.discarded_absent == 5);
  CHECK(back.records[1].ranked.empty());
}

TEST_CASE("scores round-trip at full double precision") {
  TempFile file;
  ResultsFile results;
  results.config_hash = "c";
  results.index_hash = "i";
  ResultRecord r;
  r.query_id = "q";
  r.ranked.push_back({0, -12.345678901234567, "x"});
  r.ranked.push_back({1, -1.0000000000000002, "y"});
  results.records = {r};
  write_results_jsonl(file.path, results);
  const ResultsFile back = read_results_jsonl(file.path);
  CHECK(back.records[0].ranked[0].score == -12.345678901234567);
  CHECK(back.records[0].ranked[1].score == -1.0000000000000002);
}

TEST_CASE("results reader demands the meta line") {
  TempFile no_meta("{\"query_id\": \"q\", \"ranked\": []}\n");
  CHECK(thrown_code([&] { read_results_jsonl(no_meta.path); }) == ErrorCode::kFormat);

  TempFile empty("");
  std::string message;
  CHECK(thrown_code([&] { read_results_jsonl(empty.path); }, &message) ==
        ErrorCode::kFormat);
  CHECK(message.find("empty") != std::string::npos);

  TempFile meta_only("{\"config_hash\": \"c\", \"index_hash\": \"i\"}\n");
  const ResultsFile back = read_results_jsonl(meta_only.path);
  CHECK(back.records.empty());

  TempFile bad_record(
      "{\"config_hash\": \"c\", \"index_hash\": \"i\"}\n"
      "{\"query_id\": \"q\"}\n");
  CHECK(thrown_code([&] { read_results_jsonl(bad_record.path); }, &message) ==
        ErrorCode::kFormat);
  CHECK(message.find(":2:") != std::string::npos);

  TempFile missing_diag(
      "{\"config_hash\": \"c\", \"index_hash\": \"i\"}\n"
      "{\"query_id\": \"q\", \"ranked\": []}\n");
  const ResultsFile lax = read_results_jsonl(missing_diag.path);
  CHECK(lax.records[0].diagnostics.finalized == 0);
}

}  // TEST_SUITE

}  // namespace
}  // namespace cluedex
