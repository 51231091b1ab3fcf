// End-to-end tests that spawn the installed CLI binary, driving it exactly
// as a user would: argv, files on disk, stdout, and exit codes. The committed
// 50-document smoke fixture keeps the whole pipeline under a few seconds.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <json.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

using json = nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr, interleaved
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(CLUEDEX_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  char buf[4096];
  size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) result.output.append(buf, n);
  const int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static std::atomic<int> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("cluedex_cli_" + std::to_string(::getpid()) + "_" +
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

std::string q(const std::string& s) { return "'" + s + "'"; }

const std::string kCorpus = std::string(CLUEDEX_DATA_DIR) + "/smoke_corpus.jsonl";
const std::string kQueries = std::string(CLUEDEX_DATA_DIR) + "/smoke_queries.jsonl";

// Index over the committed smoke corpus, built once and reused.
struct SmokeIndex {
  TempDir dir;
  std::string path = dir.file("smoke.idx");

  SmokeIndex() {
    const RunResult r =
        run_cli("build-index --corpus " + q(kCorpus) + " --index " + q(path));
    REQUIRE(r.exit_code == 0);
  }
};

SmokeIndex& smoke_index() {
  static SmokeIndex idx;
  return idx;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("version and help") {
  RunResult r = run_cli("--version");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("0.1.0") != std::string::npos);

  r = run_cli("--help");
  CHECK(r.exit_code == 0);
  for (const char* sub : {"build-index", "sample-clues", "retrieve", "evaluate",
                          "ablate", "bench-latency", "verify-dualflow"})
    CHECK(r.output.find(sub) != std::string::npos);

  CHECK(run_cli("no-such-command").exit_code != 0);
  CHECK(run_cli("").exit_code != 0);  // a subcommand is required
}

TEST_CASE("build-index reports corpus shape") {
  const RunResult r = run_cli("build-index --corpus " + q(kCorpus) + " --index " +
                              q(smoke_index().dir.file("again.idx")) + " --json");
  REQUIRE(r.exit_code == 0);
  const json stats = json::parse(r.output);
  CHECK(stats.at("docs") == 50);
  CHECK(stats.at("tokens").get<uint64_t>() > 1000);
  CHECK(stats.at("index_hash").get<std::string>().size() == 16);
}

TEST_CASE("full pipeline: sample, retrieve, evaluate") {
  TempDir dir;
  const std::string& index = smoke_index().path;
  const std::string decode = " --set decode.l_min=4 --set decode.l_max=10 ";

  const std::string clues = dir.file("clues.jsonl");
  RunResult r = run_cli("sample-clues --index " + q(index) + " --queries " +
                        q(kQueries) + " --output " + q(clues) + " --json");
  REQUIRE(r.exit_code == 0);
  CHECK(json::parse(r.output).at("count").get<size_t>() > 0);
  CHECK(std::filesystem::exists(clues));

  const std::string results = dir.file("results.jsonl");
  r = run_cli("retrieve --index " + q(index) + " --queries " + q(kQueries) +
              " --output " + q(results) + decode + "--json");
  REQUIRE(r.exit_code == 0);
  const json run = json::parse(r.output);
  REQUIRE(run.at("records").size() == 50);
  CHECK(run.at("config_hash").get<std::string>().size() == 16);

  r = run_cli("evaluate --index " + q(index) + " --queries " + q(kQueries) +
              " --results " + q(results) + decode + "--json");
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(r.output);
  CHECK(report.at("evaluated_queries") == 50);
  CHECK(report.at("metrics").at("R@1").get<double>() == 1.0);

  // Same evaluation as a table for humans.
  r = run_cli("evaluate --index " + q(index) + " --queries " + q(kQueries) +
              " --results " + q(results) + decode);
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("macro") != std::string::npos);
  CHECK(r.output.find("R@1") != std::string::npos);
}

TEST_CASE("config file and --set precedence") {
  TempDir dir;
  const std::string cfg = dir.file("run.cfg");
  write_file(cfg, "[eval]\nks = [1, 3]\n[decode]\nl_min = 4\nl_max = 10\n");

  const std::string results = dir.file("results.jsonl");
  const std::string base = "--index " + q(smoke_index().path) + " --queries " +
                           q(kQueries) + " -c " + q(cfg);
  RunResult r = run_cli("retrieve " + base + " --output " + q(results));
  REQUIRE(r.exit_code == 0);

  // File value shows up...
  r = run_cli("evaluate " + base + " --results " + q(results));
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("P@3") != std::string::npos);

  // ...unless --set overrides it.
  r = run_cli("evaluate " + base + " --results " + q(results) + " --set eval.ks=1,2");
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("P@2") != std::string::npos);
  CHECK(r.output.find("P@3") == std::string::npos);
}

TEST_CASE("errors surface as messages and exit codes") {
  RunResult r = run_cli("retrieve --set no.such.key=1 --index x --queries y");
  CHECK(r.exit_code == 4);  // config error
  CHECK(r.output.find("unknown config key") != std::string::npos);

  r = run_cli("retrieve --set decode.l_min");
  CHECK(r.exit_code == 4);
  CHECK(r.output.find("KEY=VALUE") != std::string::npos);

  r = run_cli("build-index --corpus /no/such/corpus.jsonl --index /tmp/x.idx");
  CHECK(r.exit_code == 2);  // io error
  CHECK(r.output.find("error:") != std::string::npos);

  r = run_cli("evaluate --index " + q(smoke_index().path) + " --queries " + q(kQueries));
  CHECK(r.exit_code == 4);
  CHECK(r.output.find("paths.results") != std::string::npos);
}

TEST_CASE("evaluate refuses a stale index unless forced") {
  TempDir dir;
  // A different corpus gives a different index hash.
  write_file(dir.file("other.jsonl"),
             json{{"title", "solo"}, {"text", "a single tiny document ."}}.dump() + "\n");
  const std::string other_index = dir.file("other.idx");
  REQUIRE(run_cli("build-index --corpus " + q(dir.file("other.jsonl")) + " --index " +
                  q(other_index))
              .exit_code == 0);

  const std::string results = dir.file("results.jsonl");
  const std::string decode = " --set decode.l_min=4 --set decode.l_max=10 ";
  REQUIRE(run_cli("retrieve --index " + q(smoke_index().path) + " --queries " +
                  q(kQueries) + " --output " + q(results) + decode)
              .exit_code == 0);

  RunResult r = run_cli("evaluate --index " + q(other_index) + " --queries " +
                        q(kQueries) + " --results " + q(results) + decode);
  CHECK(r.exit_code == 4);
  CHECK(r.output.find("force") != std::string::npos);

  r = run_cli("evaluate --index " + q(other_index) + " --queries " + q(kQueries) +
              " --results " + q(results) + decode + "--force");
  CHECK(r.exit_code == 0);
}

TEST_CASE("verify-dualflow passes and reports") {
  const RunResult r = run_cli("verify-dualflow --json");
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(r.output);
  CHECK(report.at("all_pass") == true);

  const RunResult table = run_cli("verify-dualflow");
  CHECK(table.exit_code == 0);
  CHECK(table.output.find("PASS") != std::string::npos);
}

TEST_CASE("ablate compares the four strategies") {
  const std::string decode = " --set decode.l_min=4 --set decode.l_max=10 ";
  const RunResult r = run_cli("ablate --index " + q(smoke_index().path) + " --queries " +
                              q(kQueries) + decode + "--json");
  REQUIRE(r.exit_code == 0);
  const json rows = json::parse(r.output);
  REQUIRE(rows.size() == 4);
  CHECK(rows.at(0).at("extra").at("strategy") == "knowledge_clue");
  CHECK(rows.at(3).at("extra").at("strategy") == "free_text");
}

}  // TEST_SUITE
