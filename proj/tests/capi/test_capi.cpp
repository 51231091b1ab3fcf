// Exercises the shared library strictly through the C header: every call in
// here is one an out-of-process binding could make. Fixture files are written
// with plain streams so no core header leaks in.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <json.hpp>

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "cluedex.h"

using json = nlohmann::json;

namespace {

struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static std::atomic<int> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("cluedex_capi_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << content;
}

// Six single-topic documents; each topic word appears only in its own doc.
const char* kTopics[] = {"meteor", "tides", "lichen", "geyser", "falcon", "amber"};

std::string topic_corpus() {
  std::string out;
  for (int i = 0; i < 6; ++i) {
    const std::string t = kTopics[i];
    out += json{{"title", t},
                {"text", "the " + t + " chapter opens here . every " + t +
                             " note cites the " + t + " record in full detail . " +
                             "shared closing line for all chapters ."}}
               .dump() +
           "\n";
  }
  return out;
}

std::string topic_queries() {
  std::string out;
  for (int i = 0; i < 6; ++i) {
    const std::string t = kTopics[i];
    out += json{{"id", "q" + std::to_string(i)},
                {"text", "find the chapter about the " + t},
                {"gold_doc_ids", {i}}}
               .dump() +
           "\n";
  }
  return out;
}

// Owns a string returned through a char** out-parameter.
struct OwnedString {
  char* s = nullptr;
  ~OwnedString() { cluedex_string_free(s); }
  std::string str() const { return s == nullptr ? std::string() : std::string(s); }
};

struct ConfigHandle {
  cluedex_config* c = cluedex_config_create();
  ~ConfigHandle() { cluedex_config_destroy(c); }
};

struct IndexHandle {
  cluedex_index* i = nullptr;
  ~IndexHandle() { cluedex_index_destroy(i); }
};

// Builds the topic index once per test file run.
struct Fixture {
  TempDir dir;
  std::string corpus = dir.file("corpus.jsonl");
  std::string queries = dir.file("queries.jsonl");
  std::string index_path = dir.file("index.bin");
  std::string build_hash;

  Fixture() {
    write_file(corpus, topic_corpus());
    write_file(queries, topic_queries());
    ConfigHandle cfg;
    REQUIRE(cluedex_config_set(cfg.c, "paths.corpus", corpus.c_str()) == CLUEDEX_OK);
    REQUIRE(cluedex_config_set(cfg.c, "paths.index", index_path.c_str()) == CLUEDEX_OK);
    OwnedString report;
    REQUIRE(cluedex_cmd_build_index(cfg.c, &report.s, nullptr) == CLUEDEX_OK);
    build_hash = json::parse(report.str()).at("index_hash").get<std::string>();
  }

  // Decode bounds sized for the short fixture docs.
  void retrieval_config(cluedex_config* c) const {
    REQUIRE(cluedex_config_set(c, "paths.index", index_path.c_str()) == CLUEDEX_OK);
    REQUIRE(cluedex_config_set(c, "paths.queries", queries.c_str()) == CLUEDEX_OK);
    REQUIRE(cluedex_config_set(c, "decode.l_min", "4") == CLUEDEX_OK);
    REQUIRE(cluedex_config_set(c, "decode.l_max", "10") == CLUEDEX_OK);
    REQUIRE(cluedex_config_set(c, "eval.judge", "explicit_qrels") == CLUEDEX_OK);
    REQUIRE(cluedex_config_set(c, "threads", "1") == CLUEDEX_OK);
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

std::vector<uint32_t> tokenize(const cluedex_index* index, const std::string& text) {
  size_t n = 0;
  REQUIRE(cluedex_tokenize(index, text.c_str(), nullptr, 0, &n) == CLUEDEX_OK);
  std::vector<uint32_t> tokens(n);
  REQUIRE(cluedex_tokenize(index, text.c_str(), tokens.data(), n, &n) == CLUEDEX_OK);
  return tokens;
}

}  // namespace

TEST_SUITE("capi") {

TEST_CASE("version and initial last_error") {
  REQUIRE(cluedex_version() != nullptr);
  CHECK(std::string(cluedex_version()) == "0.1.0");
  REQUIRE(cluedex_last_error() != nullptr);
}

TEST_CASE("config set, dump, and hash") {
  ConfigHandle cfg;
  REQUIRE(cfg.c != nullptr);

  char hash_before[17];
  REQUIRE(cluedex_config_hash(cfg.c, hash_before, sizeof hash_before) == CLUEDEX_OK);
  CHECK(std::string(hash_before).size() == 16);

  REQUIRE(cluedex_config_set(cfg.c, "decode.num_beams", "8") == CLUEDEX_OK);
  OwnedString dump;
  REQUIRE(cluedex_config_dump(cfg.c, &dump.s) == CLUEDEX_OK);
  CHECK(dump.str().find("decode.num_beams = 8\n") != std::string::npos);

  char hash_after[17];
  REQUIRE(cluedex_config_hash(cfg.c, hash_after, sizeof hash_after) == CLUEDEX_OK);
  CHECK(std::string(hash_after) != std::string(hash_before));

  SUBCASE("buffer too small") {
    char tiny[4];
    CHECK(cluedex_config_hash(cfg.c, tiny, sizeof tiny) == CLUEDEX_E_INVALID_ARGUMENT);
    CHECK(std::string(cluedex_last_error()).find("buffer too small") != std::string::npos);
  }
}

TEST_CASE("config error codes and messages") {
  ConfigHandle cfg;
  CHECK(cluedex_config_set(cfg.c, "no.such.key", "1") == CLUEDEX_E_CONFIG);
  CHECK(std::string(cluedex_last_error()).find("unknown config key") != std::string::npos);
  CHECK(cluedex_config_set(cfg.c, "decode.num_beams", "banana") == CLUEDEX_E_CONFIG);

  CHECK(cluedex_config_set(nullptr, "seed", "1") == CLUEDEX_E_INVALID_ARGUMENT);
  CHECK(cluedex_config_set(cfg.c, nullptr, "1") == CLUEDEX_E_INVALID_ARGUMENT);
  CHECK(cluedex_config_load_file(cfg.c, "/no/such/file.cfg") == CLUEDEX_E_IO);
}

TEST_CASE("config file loading reports line numbers") {
  TempDir dir;
  const std::string path = dir.file("run.cfg");
  write_file(path, "[decode]\nnum_beams = 6\nl_min = oops\n");
  ConfigHandle cfg;
  CHECK(cluedex_config_load_file(cfg.c, path.c_str()) == CLUEDEX_E_CONFIG);
  CHECK(std::string(cluedex_last_error()).find(":3:") != std::string::npos);

  write_file(path, "[decode]\nnum_beams = 6\n");
  REQUIRE(cluedex_config_load_file(cfg.c, path.c_str()) == CLUEDEX_OK);
  OwnedString dump;
  REQUIRE(cluedex_config_dump(cfg.c, &dump.s) == CLUEDEX_OK);
  CHECK(dump.str().find("decode.num_beams = 6\n") != std::string::npos);
}

TEST_CASE("index open and accessors") {
  Fixture& f = fixture();
  IndexHandle idx;
  REQUIRE(cluedex_index_open(f.index_path.c_str(), &idx.i) == CLUEDEX_OK);

  CHECK(cluedex_index_num_docs(idx.i) == 6);
  CHECK(cluedex_index_num_tokens(idx.i) > 0);
  CHECK(cluedex_index_vocab_size(idx.i) > 6);

  char hash[17];
  REQUIRE(cluedex_index_hash(idx.i, hash, sizeof hash) == CLUEDEX_OK);
  CHECK(std::string(hash) == f.build_hash);

  SUBCASE("missing file is an io error") {
    cluedex_index* none = nullptr;
    CHECK(cluedex_index_open(f.dir.file("nope.bin").c_str(), &none) == CLUEDEX_E_IO);
    CHECK(none == nullptr);
  }
  SUBCASE("null handle accessors return zero") {
    CHECK(cluedex_index_num_docs(nullptr) == 0);
    CHECK(cluedex_index_num_tokens(nullptr) == 0);
    CHECK(cluedex_index_vocab_size(nullptr) == 0);
  }
}

TEST_CASE("tokenize round trip and cap semantics") {
  Fixture& f = fixture();
  IndexHandle idx;
  REQUIRE(cluedex_index_open(f.index_path.c_str(), &idx.i) == CLUEDEX_OK);

  const std::vector<uint32_t> tokens = tokenize(idx.i, "the meteor chapter");
  REQUIRE(tokens.size() == 3);

  OwnedString text;
  REQUIRE(cluedex_detokenize(idx.i, tokens.data(), tokens.size(), &text.s) == CLUEDEX_OK);
  CHECK(text.str() == "the meteor chapter");

  SUBCASE("cap smaller than the token count still reports the full count") {
    uint32_t two[2] = {0, 0};
    size_t n = 0;
    REQUIRE(cluedex_tokenize(idx.i, "the meteor chapter", two, 2, &n) == CLUEDEX_OK);
    CHECK(n == 3);
    CHECK(two[0] == tokens[0]);
    CHECK(two[1] == tokens[1]);
  }
  SUBCASE("out-of-range token id is rejected") {
    const uint32_t bad = cluedex_index_vocab_size(idx.i);
    OwnedString out;
    CHECK(cluedex_detokenize(idx.i, &bad, 1, &out.s) == CLUEDEX_E_INVALID_ARGUMENT);
  }
}

TEST_CASE("find classifies unique, ambiguous, and absent patterns") {
  Fixture& f = fixture();
  IndexHandle idx;
  REQUIRE(cluedex_index_open(f.index_path.c_str(), &idx.i) == CLUEDEX_OK);

  uint64_t occurrences = 0;
  int match = -1;
  uint32_t doc = 0;

  // "meteor" appears three times, all inside doc 0.
  const std::vector<uint32_t> unique = tokenize(idx.i, "meteor");
  REQUIRE(cluedex_index_find(idx.i, unique.data(), unique.size(), &occurrences, &match,
                             &doc) == CLUEDEX_OK);
  CHECK(occurrences == 3);
  CHECK(match == CLUEDEX_MATCH_UNIQUE);
  CHECK(doc == 0);

  // The closing line is shared by all six documents.
  const std::vector<uint32_t> shared = tokenize(idx.i, "shared closing line");
  REQUIRE(cluedex_index_find(idx.i, shared.data(), shared.size(), &occurrences, &match,
                             &doc) == CLUEDEX_OK);
  CHECK(occurrences == 6);
  CHECK(match == CLUEDEX_MATCH_AMBIGUOUS);
  CHECK(doc == UINT32_MAX);

  // "amber meteor" never occurs even though both words do.
  const std::vector<uint32_t> absent = tokenize(idx.i, "amber meteor");
  REQUIRE(cluedex_index_find(idx.i, absent.data(), absent.size(), &occurrences, &match,
                             &doc) == CLUEDEX_OK);
  CHECK(occurrences == 0);
  CHECK(match == CLUEDEX_MATCH_ABSENT);

  SUBCASE("empty patterns are invalid") {
    CHECK(cluedex_index_find(idx.i, unique.data(), 0, &occurrences, &match, &doc) ==
          CLUEDEX_E_INVALID_ARGUMENT);
  }
}

TEST_CASE("extensions enumerate corpus-consistent continuations") {
  Fixture& f = fixture();
  IndexHandle idx;
  REQUIRE(cluedex_index_open(f.index_path.c_str(), &idx.i) == CLUEDEX_OK);

  // From the empty pattern every real token in the stream can come next.
  size_t n = 0;
  REQUIRE(cluedex_index_extensions(idx.i, nullptr, 0, nullptr, 0, &n) == CLUEDEX_OK);
  CHECK(n > 6);
  CHECK(n <= cluedex_index_vocab_size(idx.i));

  std::vector<uint32_t> next(n);
  REQUIRE(cluedex_index_extensions(idx.i, nullptr, 0, next.data(), n, &n) == CLUEDEX_OK);
  for (size_t i = 1; i < next.size(); ++i) CHECK(next[i - 1] < next[i]);

  // "every lichen" is followed only by "note".
  const std::vector<uint32_t> prefix = tokenize(idx.i, "every lichen");
  REQUIRE(cluedex_index_extensions(idx.i, prefix.data(), prefix.size(), next.data(),
                                   next.size(), &n) == CLUEDEX_OK);
  REQUIRE(n == 1);
  OwnedString word;
  REQUIRE(cluedex_detokenize(idx.i, next.data(), 1, &word.s) == CLUEDEX_OK);
  CHECK(word.str() == "note");

  // Every reported extension really extends to a present pattern.
  std::vector<uint32_t> extended = prefix;
  extended.push_back(next[0]);
  uint64_t occurrences = 0;
  REQUIRE(cluedex_index_find(idx.i, extended.data(), extended.size(), &occurrences,
                             nullptr, nullptr) == CLUEDEX_OK);
  CHECK(occurrences > 0);
}

TEST_CASE("single-query retrieval returns the gold document") {
  Fixture& f = fixture();
  IndexHandle idx;
  REQUIRE(cluedex_index_open(f.index_path.c_str(), &idx.i) == CLUEDEX_OK);
  ConfigHandle cfg;
  f.retrieval_config(cfg.c);

  const std::string query =
      json{{"id", "probe"}, {"text", "find the chapter about the falcon"}}.dump();
  OwnedString result;
  REQUIRE(cluedex_query_retrieve(idx.i, cfg.c, query.c_str(), &result.s) == CLUEDEX_OK);

  const json record = json::parse(result.str());
  CHECK(record.at("query_id") == "probe");
  REQUIRE(!record.at("ranked").empty());
  CHECK(record.at("ranked").at(0).at("doc_id").get<uint32_t>() == 4);
  CHECK(record.at("diagnostics").contains("finalized"));

  SUBCASE("malformed query json") {
    OwnedString none;
    CHECK(cluedex_query_retrieve(idx.i, cfg.c, "{not json", &none.s) ==
          CLUEDEX_E_INVALID_ARGUMENT);
    CHECK(cluedex_query_retrieve(idx.i, cfg.c, "{\"id\":\"x\"}", &none.s) ==
          CLUEDEX_E_INVALID_ARGUMENT);
  }
}

TEST_CASE("whole-run commands: retrieve then evaluate") {
  Fixture& f = fixture();
  const std::string results = f.dir.file("results.jsonl");

  ConfigHandle cfg;
  f.retrieval_config(cfg.c);
  REQUIRE(cluedex_config_set(cfg.c, "paths.output", results.c_str()) == CLUEDEX_OK);

  OwnedString retrieve_json;
  REQUIRE(cluedex_cmd_retrieve(cfg.c, &retrieve_json.s, nullptr) == CLUEDEX_OK);
  const json run = json::parse(retrieve_json.str());
  CHECK(run.at("records").size() == 6);
  CHECK(run.at("index_hash") == f.build_hash);

  ConfigHandle eval_cfg;
  f.retrieval_config(eval_cfg.c);
  REQUIRE(cluedex_config_set(eval_cfg.c, "paths.results", results.c_str()) == CLUEDEX_OK);
  OwnedString eval_json;
  OwnedString eval_table;
  REQUIRE(cluedex_cmd_evaluate(eval_cfg.c, &eval_json.s, &eval_table.s) == CLUEDEX_OK);

  const json report = json::parse(eval_json.str());
  CHECK(report.at("evaluated_queries") == 6);
  CHECK(report.at("metrics").at("P@1").get<double>() == 1.0);
  CHECK(report.at("metrics").at("R@1").get<double>() == 1.0);
  CHECK(eval_table.str().find("macro") != std::string::npos);

  SUBCASE("missing paths are config errors") {
    ConfigHandle bare;
    CHECK(cluedex_cmd_retrieve(bare.c, nullptr, nullptr) == CLUEDEX_E_CONFIG);
    CHECK(cluedex_cmd_evaluate(bare.c, nullptr, nullptr) == CLUEDEX_E_CONFIG);
    CHECK(cluedex_cmd_build_index(bare.c, nullptr, nullptr) == CLUEDEX_E_CONFIG);
  }
}

TEST_CASE("dualflow verification through the C surface") {
  int all_pass = 0;
  OwnedString report_json;
  OwnedString table;
  REQUIRE(cluedex_verify_dualflow(7, &all_pass, &report_json.s, &table.s) == CLUEDEX_OK);
  CHECK(all_pass == 1);
  const json report = json::parse(report_json.str());
  CHECK(report.at("all_pass") == true);
  CHECK(!report.at("checks").empty());
  CHECK(table.str().find("PASS") != std::string::npos);
}

}  // TEST_SUITE
