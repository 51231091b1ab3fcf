// Command-line front end. Talks to the engine exclusively through the C API
// in cluedex.h, so it doubles as a worked example of driving the shared
// library from another language.
#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "cluedex.h"

namespace {

// Settings shared by every command that takes a run configuration.
// Precedence: config file, then named flags, then --set pairs in order.
struct CommonArgs {
  std::string config_file;
  std::vector<std::pair<std::string, std::string>> flag_overrides;
  std::vector<std::string> sets;
  bool json = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_file,
                  "config file: key = value lines with [section] headers");
  cmd->add_option("-s,--set", args.sets,
                  "override one config key, e.g. --set decode.num_beams=8");
  cmd->add_flag("--json", args.json, "print the JSON report instead of the table");

  const auto opt = [cmd, &args](const std::string& flag, const std::string& key,
                                const std::string& desc) {
    cmd->add_option_function<std::string>(
        flag, [&args, key](const std::string& value) { args.flag_overrides.emplace_back(key, value); },
        desc);
  };
  opt("--corpus", "paths.corpus", "corpus jsonl (one {\"title\",\"text\"} per line)");
  opt("--index", "paths.index", "index container file");
  opt("--queries", "paths.queries", "queries jsonl");
  opt("--results", "paths.results", "results jsonl to evaluate");
  opt("--output", "paths.output", "file the command writes (results or clues)");
  opt("--stopwords", "paths.stopwords", "stopword list, one word per line");
  opt("--seed", "seed", "run seed");
  opt("--threads", "threads", "worker threads, 0 = all cores");
  opt("--top-k", "top_k", "ranked-list cutoff");
  opt("--scorer", "scorer.kind", "ngram | oracle | external");
  opt("--strategy", "decode.strategy",
      "knowledge_clue | full_document | first_sentence | free_text");
  cmd->add_flag_callback(
      "--force", [&args] { args.flag_overrides.emplace_back("force", "true"); },
      "evaluate results even if the index hash does not match");
}

int fail_with_last_error(int rc) {
  std::fprintf(stderr, "error: %s\n", cluedex_last_error());
  return rc;
}

int apply_args(cluedex_config* config, const CommonArgs& args) {
  if (!args.config_file.empty()) {
    const int rc = cluedex_config_load_file(config, args.config_file.c_str());
    if (rc != CLUEDEX_OK) return rc;
  }
  for (const auto& [key, value] : args.flag_overrides) {
    const int rc = cluedex_config_set(config, key.c_str(), value.c_str());
    if (rc != CLUEDEX_OK) return rc;
  }
  for (const std::string& pair : args.sets) {
    const std::size_t eq = pair.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::fprintf(stderr, "error: --set expects KEY=VALUE, got '%s'\n", pair.c_str());
      return CLUEDEX_E_CONFIG;
    }
    const std::string key = pair.substr(0, eq);
    const std::string value = pair.substr(eq + 1);
    const int rc = cluedex_config_set(config, key.c_str(), value.c_str());
    if (rc != CLUEDEX_OK) return rc;
  }
  return CLUEDEX_OK;
}

using CommandFn = int (*)(const cluedex_config*, char**, char**);

int run_command(CommandFn fn, const CommonArgs& args) {
  cluedex_config* config = cluedex_config_create();
  if (config == nullptr) {
    std::fprintf(stderr, "error: out of memory\n");
    return CLUEDEX_E_RUNTIME;
  }
  int rc = apply_args(config, args);
  if (rc != CLUEDEX_OK) {
    cluedex_config_destroy(config);
    return fail_with_last_error(rc);
  }
  char* report = nullptr;
  rc = args.json ? fn(config, &report, nullptr) : fn(config, nullptr, &report);
  cluedex_config_destroy(config);
  if (rc != CLUEDEX_OK) return fail_with_last_error(rc);
  if (report != nullptr) {
    std::fputs(report, stdout);
    if (args.json) std::fputc('\n', stdout);
    cluedex_string_free(report);
  }
  return 0;
}

int run_verify(std::uint64_t seed, bool json) {
  int all_pass = 0;
  char* report = nullptr;
  const int rc = json ? cluedex_verify_dualflow(seed, &all_pass, &report, nullptr)
                      : cluedex_verify_dualflow(seed, &all_pass, nullptr, &report);
  if (rc != CLUEDEX_OK) return fail_with_last_error(rc);
  if (report != nullptr) {
    std::fputs(report, stdout);
    if (json) std::fputc('\n', stdout);
    cluedex_string_free(report);
  }
  if (all_pass == 0) {
    std::fprintf(stderr, "error: verification failed\n");
    return CLUEDEX_E_RUNTIME;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cluedex — retrieve documents by decoding knowledge clues"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cluedex_version());

  CommonArgs args;
  CLI::App* build = app.add_subcommand(
      "build-index", "Tokenize a corpus and write the searchable index container");
  CLI::App* sample = app.add_subcommand(
      "sample-clues", "Sample document-unique clue candidates for judged queries");
  CLI::App* retrieve = app.add_subcommand(
      "retrieve", "Decode knowledge clues per query and rank the documents they hit");
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "Score a results file against judged queries");
  CLI::App* ablate = app.add_subcommand(
      "ablate", "Run retrieval under each decode strategy and compare metrics");
  CLI::App* bench = app.add_subcommand(
      "bench-latency", "Time single-token extension queries and full decodes");
  for (CLI::App* cmd : {build, sample, retrieve, evaluate, ablate, bench})
    add_common(cmd, args);

  std::uint64_t verify_seed = 7;
  bool verify_json = false;
  CLI::App* verify = app.add_subcommand(
      "verify-dualflow",
      "Check gradients and gate identities of the two-stream attention block");
  verify->add_option("--seed", verify_seed, "seed for the randomized checks");
  verify->add_flag("--json", verify_json, "print the JSON report instead of the table");

  CLI11_PARSE(app, argc, argv);

  if (build->parsed()) return run_command(cluedex_cmd_build_index, args);
  if (sample->parsed()) return run_command(cluedex_cmd_sample_clues, args);
  if (retrieve->parsed()) return run_command(cluedex_cmd_retrieve, args);
  if (evaluate->parsed()) return run_command(cluedex_cmd_evaluate, args);
  if (ablate->parsed()) return run_command(cluedex_cmd_ablate, args);
  if (bench->parsed()) return run_command(cluedex_cmd_bench_latency, args);
  if (verify->parsed()) return run_verify(verify_seed, verify_json);
  return 0;
}
