// C ABI over the core library. Every entry point catches everything: no
// exception may cross into C callers. Returned strings are malloc'd so the
// header's cluedex_string_free contract holds regardless of the C++ runtime.
#include "cluedex.h"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "core/common.hpp"
#include "core/config.hpp"
#include "core/dualflow.hpp"
#include "core/engine.hpp"
#include "core/fm_index.hpp"
#include "core/jsonl.hpp"

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

struct cluedex_config {
  cluedex::RunConfig cfg;
};

struct cluedex_index {
  cluedex::IndexArtifact artifact;
};

namespace {

thread_local std::string g_last_error;

int code_of(cluedex::ErrorCode code) {
  using cluedex::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return CLUEDEX_E_INVALID_ARGUMENT;
    case ErrorCode::kIo: return CLUEDEX_E_IO;
    case ErrorCode::kFormat: return CLUEDEX_E_FORMAT;
    case ErrorCode::kConfig: return CLUEDEX_E_CONFIG;
    case ErrorCode::kProtocol: return CLUEDEX_E_PROTOCOL;
    case ErrorCode::kTimeout: return CLUEDEX_E_TIMEOUT;
    case ErrorCode::kVocabMismatch: return CLUEDEX_E_VOCAB_MISMATCH;
    case ErrorCode::kAmbiguous: return CLUEDEX_E_AMBIGUOUS;
    case ErrorCode::kAbsent: return CLUEDEX_E_ABSENT;
    case ErrorCode::kRuntime: return CLUEDEX_E_RUNTIME;
  }
  return CLUEDEX_E_RUNTIME;
}

int fail(int code, const std::string& message) {
  g_last_error = message;
  return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return CLUEDEX_OK;
  } catch (const cluedex::Error& e) {
    return fail(code_of(e.code()), e.what());
  } catch (const std::exception& e) {
    return fail(CLUEDEX_E_RUNTIME, e.what());
  } catch (...) {
    return fail(CLUEDEX_E_PANIC, "unexpected non-standard exception");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put_string(char** out, const std::string& s) {
  if (out != nullptr) *out = dup_string(s);
}

// Copies a hash (or any short string) into a caller-provided buffer.
int copy_to_buf(const std::string& s, char* buf, size_t buf_len) {
  if (buf == nullptr)
    return fail(CLUEDEX_E_INVALID_ARGUMENT, "output buffer is null");
  if (buf_len < s.size() + 1)
    return fail(CLUEDEX_E_INVALID_ARGUMENT,
                "buffer too small: need " + std::to_string(s.size() + 1) + " bytes");
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return CLUEDEX_OK;
}

// Fill caller array + report the full count (tokenize/extensions pattern).
int copy_tokens(const std::vector<cluedex::TokenId>& tokens, uint32_t* out, size_t cap,
                size_t* count_out) {
  if (count_out == nullptr)
    return fail(CLUEDEX_E_INVALID_ARGUMENT, "count_out is null");
  if (out == nullptr && cap != 0)
    return fail(CLUEDEX_E_INVALID_ARGUMENT, "token buffer is null but cap is nonzero");
  *count_out = tokens.size();
  const size_t n = tokens.size() < cap ? tokens.size() : cap;
  for (size_t i = 0; i < n; ++i) out[i] = tokens[i];
  return CLUEDEX_OK;
}

std::string build_stats_json(const cluedex::BuildStats& s) {
  ordered_json j;
  j["docs"] = s.docs;
  j["tokens"] = s.tokens;
  j["vocab"] = s.vocab;
  j["seconds"] = s.seconds;
  j["index_hash"] = s.index_hash;
  return j.dump(2);
}

std::string build_stats_table(const cluedex::BuildStats& s) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "docs        %u\ntokens      %llu\nvocab       %u\nseconds     "
                "%.3f\nindex_hash  %s\n",
                s.docs, static_cast<unsigned long long>(s.tokens), s.vocab, s.seconds,
                s.index_hash.c_str());
  return buf;
}

ordered_json clue_json(const cluedex::ClueRecord& c) {
  ordered_json j;
  j["query_id"] = c.query_id;
  j["doc_id"] = c.doc_id;
  j["clue_tokens"] = c.clue_tokens;
  j["clue_text"] = c.clue_text;
  j["start"] = c.start;
  j["sentence_index"] = c.sentence_index;
  return j;
}

ordered_json record_json(const cluedex::ResultRecord& r) {
  ordered_json j;
  j["query_id"] = r.query_id;
  ordered_json ranked = ordered_json::array();
  for (const cluedex::RankedEntry& e : r.ranked) {
    ordered_json je;
    je["doc_id"] = e.doc_id;
    je["score"] = e.score;
    je["clue_text"] = e.clue_text;
    ranked.push_back(std::move(je));
  }
  j["ranked"] = std::move(ranked);
  ordered_json diag;
  diag["finalized"] = r.diagnostics.finalized;
  diag["dropped_ambiguous"] = r.diagnostics.dropped_ambiguous;
  diag["dead_ends"] = r.diagnostics.dead_ends;
  diag["discarded_absent"] = r.diagnostics.discarded_absent;
  j["diagnostics"] = std::move(diag);
  return j;
}

std::string bench_json(const cluedex::BenchReport& b) {
  ordered_json j;
  j["index_tokens"] = b.index_tokens;
  j["index_docs"] = b.index_docs;
  j["extension_probes"] = b.extension_probes;
  j["extend_p50_ms"] = b.extend_p50_ms;
  j["extend_p95_ms"] = b.extend_p95_ms;
  j["extend_max_ms"] = b.extend_max_ms;
  j["decodes"] = b.decodes;
  j["decode_p50_ms"] = b.decode_p50_ms;
  j["decode_p95_ms"] = b.decode_p95_ms;
  j["decode_max_ms"] = b.decode_max_ms;
  return j.dump(2);
}

// queries.jsonl object -> Query, tokenized against the index's vocabulary.
cluedex::Query parse_query(const json& j, const cluedex::Tokenizer& tokenizer) {
  using cluedex::ErrorCode;
  if (!j.is_object())
    cluedex::throw_error(ErrorCode::kInvalidArgument, "query must be a JSON object");
  if (!j.contains("id"))
    cluedex::throw_error(ErrorCode::kInvalidArgument, "query is missing field 'id'");
  if (!j.contains("text") || !j.at("text").is_string())
    cluedex::throw_error(ErrorCode::kInvalidArgument,
                         "query is missing string field 'text'");
  cluedex::Query q;
  const json& id = j.at("id");
  if (id.is_string())
    q.id = id.get<std::string>();
  else if (id.is_number_integer())
    q.id = std::to_string(id.get<std::int64_t>());
  else
    cluedex::throw_error(ErrorCode::kInvalidArgument, "query id must be string or int");
  q.raw_text = j.at("text").get<std::string>();
  q.text_tokens = tokenizer.tokenize_frozen(q.raw_text);
  if (q.text_tokens.empty())
    cluedex::throw_error(ErrorCode::kInvalidArgument, "query text has no tokens");
  if (j.contains("answers"))
    for (const json& a : j.at("answers")) q.answers.push_back(a.get<std::string>());
  if (j.contains("gold_doc_ids"))
    for (const json& g : j.at("gold_doc_ids"))
      q.gold_doc_ids.push_back(g.get<std::uint32_t>());
  if (j.contains("feature"))
    for (const json& f : j.at("feature")) q.feature.push_back(f.get<double>());
  if (j.contains("oracle_clue"))
    q.oracle_clue = tokenizer.tokenize_frozen(j.at("oracle_clue").get<std::string>());
  return q;
}

}  // namespace

extern "C" {

const char* cluedex_version(void) { return "0.1.0"; }

const char* cluedex_last_error(void) { return g_last_error.c_str(); }

void cluedex_string_free(char* s) { std::free(s); }

/* ---- config ------------------------------------------------------------ */

cluedex_config* cluedex_config_create(void) {
  try {
    return new cluedex_config{};
  } catch (...) {
    return nullptr;
  }
}

void cluedex_config_destroy(cluedex_config* config) { delete config; }

int cluedex_config_load_file(cluedex_config* config, const char* path) {
  if (config == nullptr) return fail(CLUEDEX_E_INVALID_ARGUMENT, "config is null");
  if (path == nullptr) return fail(CLUEDEX_E_INVALID_ARGUMENT, "path is null");
  return guarded([&] { cluedex::load_config_file(config->cfg, path); });
}

int cluedex_config_set(cluedex_config* config, const char* key, const char* value) {
  if (config == nullptr) return fail(CLUEDEX_E_INVALID_ARGUMENT, "config is null");
  if (key == nullptr || value == nullptr)
    return fail(CLUEDEX_E_INVALID_ARGUMENT, "key and value must be non-null");
  return guarded([&] { config->cfg.apply(key, value); });
}

int cluedex_config_dump(const cluedex_config* config, char** text_out) {
  if (config == nullptr) return fail(CLUEDEX_E_INVALID_ARGUMENT, "config is null");
  if (text_out == nullptr) return fail(CLUEDEX_E_INVALID_ARGUMENT, "text_out is null");
  return guarded([&] { put_string(text_out, config->cfg.canonical()); });
}

int cluedex_config_hash(const cluedex_config* config, char* buf, size_t buf_len) {
  if (config == nullptr) return fail(CLUEDEX_E_INVALID_ARGUMENT, "config is null");
  int rc = CLUEDEX_OK;
  const int guard = guarded([&] { rc = copy_to_buf(config->cfg.config_hash(), buf, buf_len); });
  return guard != CLUEDEX_OK ? guard : rc;
}

/* ---- index ------------------------------------------------------------- */

int cluedex_index_open(const char* path, cluedex_index** index_out) {
  if (path == nullptr) return fail(CLUEDEX_E_INVALID_ARGUMENT, "path is null");
  if (index_out == nullptr) return fail(CLUEDEX_E_INVALID_ARGUMENT, "index_out is null");
  return guarded([&] {
    auto handle = std::make_unique<cluedex_index>();
    handle->artifact = cluedex::IndexArtifact::open(path);
    *index_out = handle.release();
  });
}

void cluedex_index_destroy(cluedex_index* index) { delete index; }

uint32_t cluedex_index_num_docs(const cluedex_index* index) {
  return index == nullptr ? 0 : index->artifact.fm.num_docs();
}

uint64_t cluedex_index_num_tokens(const cluedex_index* index) {
  return index == nullptr ? 0 : index->artifact.kb.total_tokens();
}

uint32_t cluedex_index_vocab_size(const cluedex_index* index) {
  return index == nullptr ? 0 : index->artifact.fm.vocab_size();
}

int cluedex_index_hash(const cluedex_index* index, char* buf, size_t buf_len) {
  if (index == nullptr) return fail(CLUEDEX_E_INVALID_ARGUMENT, "index is null");
  return copy_to_buf(index->artifact.index_hash, buf, buf_len);
}

int cluedex_tokenize(const cluedex_index* index, const char* text, uint32_t* tokens_out,
                     size_t cap, size_t* count_out) {
  if (index == nullptr) return fail(CLUEDEX_E_INVALID_ARGUMENT, "index is null");
  if (text == nullptr) return fail(CLUEDEX_E_INVALID_ARGUMENT, "text is null");
  int rc = CLUEDEX_OK;
  const int guard = guarded([&] {
    const std::vector<cluedex::TokenId> tokens =
        index->artifact.kb.tokenizer().tokenize_frozen(text);
    rc = copy_tokens(tokens, tokens_out, cap, count_out);
  });
  return guard != CLUEDEX_OK ? guard : rc;
}

int cluedex_detokenize(const cluedex_index* index, const uint32_t* tokens, size_t count,
                       char** text_out) {
  if (index == nullptr) return fail(CLUEDEX_E_INVALID_ARGUMENT, "index is null");
  if (tokens == nullptr && count != 0)
    return fail(CLUEDEX_E_INVALID_ARGUMENT, "tokens is null but count is nonzero");
  if (text_out == nullptr) return fail(CLUEDEX_E_INVALID_ARGUMENT, "text_out is null");
  return guarded([&] {
    const cluedex::Tokenizer& tok = index->artifact.kb.tokenizer();
    std::vector<cluedex::TokenId> ids(tokens, tokens + count);
    for (const cluedex::TokenId id : ids)
      if (id >= tok.vocab_size())
        cluedex::throw_error(cluedex::ErrorCode::kInvalidArgument,
                             "token id " + std::to_string(id) + " out of range");
    put_string(text_out, tok.detokenize(ids));
  });
}

int cluedex_index_find(const cluedex_index* index, const uint32_t* tokens, size_t count,
                       uint64_t* occurrences_out, int* match_out, uint32_t* doc_out) {
  if (index == nullptr) return fail(CLUEDEX_E_INVALID_ARGUMENT, "index is null");
  if (tokens == nullptr || count == 0)
    return fail(CLUEDEX_E_INVALID_ARGUMENT, "token sequence must be non-empty");
  return guarded([&] {
    const cluedex::FmIndex& fm = index->artifact.fm;
    const std::vector<cluedex::TokenId> pattern(tokens, tokens + count);
    const cluedex::SearchState state = fm.find(pattern);
    const cluedex::Validity validity = fm.valid_distinct(state);
    if (occurrences_out != nullptr) *occurrences_out = fm.count(state);
    if (match_out != nullptr) *match_out = static_cast<int>(validity);
    if (doc_out != nullptr)
      *doc_out = validity == cluedex::Validity::kUnique ? fm.lookup_doc(state)
                                                        : UINT32_MAX;
  });
}

int cluedex_index_extensions(const cluedex_index* index, const uint32_t* tokens,
                             size_t count, uint32_t* tokens_out, size_t cap,
                             size_t* count_out) {
  if (index == nullptr) return fail(CLUEDEX_E_INVALID_ARGUMENT, "index is null");
  if (tokens == nullptr && count != 0)
    return fail(CLUEDEX_E_INVALID_ARGUMENT, "tokens is null but count is nonzero");
  int rc = CLUEDEX_OK;
  const int guard = guarded([&] {
    const cluedex::FmIndex& fm = index->artifact.fm;
    const std::vector<cluedex::TokenId> pattern(tokens, tokens + count);
    const cluedex::SearchState state =
        count == 0 ? fm.root() : fm.find(pattern);
    std::vector<cluedex::Extension> extensions;
    fm.get_next(state, extensions);
    std::vector<cluedex::TokenId> next;
    next.reserve(extensions.size());
    for (const cluedex::Extension& e : extensions) next.push_back(e.token);
    rc = copy_tokens(next, tokens_out, cap, count_out);
  });
  return guard != CLUEDEX_OK ? guard : rc;
}

int cluedex_query_retrieve(const cluedex_index* index, const cluedex_config* config,
                           const char* query_json, char** result_json_out) {
  if (index == nullptr) return fail(CLUEDEX_E_INVALID_ARGUMENT, "index is null");
  if (config == nullptr) return fail(CLUEDEX_E_INVALID_ARGUMENT, "config is null");
  if (query_json == nullptr)
    return fail(CLUEDEX_E_INVALID_ARGUMENT, "query_json is null");
  if (result_json_out == nullptr)
    return fail(CLUEDEX_E_INVALID_ARGUMENT, "result_json_out is null");
  return guarded([&] {
    json parsed;
    try {
      parsed = json::parse(query_json);
    } catch (const json::exception& e) {
      cluedex::throw_error(cluedex::ErrorCode::kInvalidArgument,
                           std::string("query_json is not valid JSON: ") + e.what());
    }
    const cluedex::Query query = parse_query(parsed, index->artifact.kb.tokenizer());
    const cluedex::ResultsFile results =
        cluedex::run_retrieval(index->artifact, {query}, config->cfg);
    put_string(result_json_out, record_json(results.records.at(0)).dump());
  });
}

/* ---- whole-run commands -------------------------------------------------- */

int cluedex_cmd_build_index(const cluedex_config* config, char** json_out,
                            char** text_out) {
  if (config == nullptr) return fail(CLUEDEX_E_INVALID_ARGUMENT, "config is null");
  return guarded([&] {
    const cluedex::BuildStats stats = cluedex::cmd_build_index(config->cfg);
    put_string(json_out, build_stats_json(stats));
    put_string(text_out, build_stats_table(stats));
  });
}

int cluedex_cmd_sample_clues(const cluedex_config* config, char** json_out,
                             char** text_out) {
  if (config == nullptr) return fail(CLUEDEX_E_INVALID_ARGUMENT, "config is null");
  return guarded([&] {
    const std::vector<cluedex::ClueRecord> clues = cluedex::cmd_sample_clues(config->cfg);
    if (json_out != nullptr) {
      ordered_json j;
      j["count"] = clues.size();
      ordered_json arr = ordered_json::array();
      for (const cluedex::ClueRecord& c : clues) arr.push_back(clue_json(c));
      j["clues"] = std::move(arr);
      put_string(json_out, j.dump(2));
    }
    if (text_out != nullptr) {
      std::string table = "sampled " + std::to_string(clues.size()) + " clues\n";
      for (const cluedex::ClueRecord& c : clues)
        table += c.query_id + "  doc " + std::to_string(c.doc_id) + "  \"" +
                 c.clue_text + "\"\n";
      put_string(text_out, table);
    }
  });
}

int cluedex_cmd_retrieve(const cluedex_config* config, char** json_out, char** text_out) {
  if (config == nullptr) return fail(CLUEDEX_E_INVALID_ARGUMENT, "config is null");
  return guarded([&] {
    const cluedex::ResultsFile results = cluedex::cmd_retrieve(config->cfg);
    if (json_out != nullptr) {
      ordered_json j;
      j["config_hash"] = results.config_hash;
      j["index_hash"] = results.index_hash;
      ordered_json arr = ordered_json::array();
      for (const cluedex::ResultRecord& r : results.records)
        arr.push_back(record_json(r));
      j["records"] = std::move(arr);
      put_string(json_out, j.dump(2));
    }
    if (text_out != nullptr) {
      std::string table = "retrieved " + std::to_string(results.records.size()) +
                          " queries (config " + results.config_hash + ", index " +
                          results.index_hash + ")\n";
      char line[128];
      for (const cluedex::ResultRecord& r : results.records) {
        if (r.ranked.empty()) {
          table += r.query_id + "  (no documents)\n";
          continue;
        }
        std::snprintf(line, sizeof(line), "%s  doc %u  score %.4f  ", r.query_id.c_str(),
                      r.ranked[0].doc_id, r.ranked[0].score);
        table += line;
        table += "\"" + r.ranked[0].clue_text + "\"\n";
      }
      put_string(text_out, table);
    }
  });
}

int cluedex_cmd_evaluate(const cluedex_config* config, char** json_out, char** text_out) {
  if (config == nullptr) return fail(CLUEDEX_E_INVALID_ARGUMENT, "config is null");
  return guarded([&] {
    const cluedex::MetricReport report = cluedex::cmd_evaluate(config->cfg);
    put_string(json_out, report.to_json());
    if (text_out != nullptr) {
      std::string table = report.to_table();
      table += "evaluated " + std::to_string(report.evaluated_queries) + " queries (" +
               report.judge_mode + "), config " + report.config_hash + ", index " +
               report.index_hash + "\n";
      if (!report.excluded_query_ids.empty())
        table += "excluded " + std::to_string(report.excluded_query_ids.size()) +
                 " queries with no judging data\n";
      put_string(text_out, table);
    }
  });
}

int cluedex_cmd_ablate(const cluedex_config* config, char** json_out, char** text_out) {
  if (config == nullptr) return fail(CLUEDEX_E_INVALID_ARGUMENT, "config is null");
  return guarded([&] {
    const auto rows = cluedex::cmd_ablate(config->cfg);
    if (json_out != nullptr) {
      ordered_json arr = ordered_json::array();
      for (const auto& [strategy, report] : rows)
        arr.push_back(ordered_json::parse(report.to_json()));
      put_string(json_out, arr.dump(2));
    }
    if (text_out != nullptr) {
      std::string table;
      for (const auto& [strategy, report] : rows) {
        table += "== " + strategy + " ==\n" + report.to_table();
        const auto it = report.extra.find("discarded_absent");
        if (it != report.extra.end())
          table += "discarded_absent  " + it->second + "\n";
      }
      put_string(text_out, table);
    }
  });
}

int cluedex_cmd_bench_latency(const cluedex_config* config, char** json_out,
                              char** text_out) {
  if (config == nullptr) return fail(CLUEDEX_E_INVALID_ARGUMENT, "config is null");
  return guarded([&] {
    const cluedex::BenchReport report = cluedex::cmd_bench_latency(config->cfg);
    put_string(json_out, bench_json(report));
    put_string(text_out, report.to_table());
  });
}

int cluedex_verify_dualflow(uint64_t seed, int* all_pass_out, char** json_out,
                            char** text_out) {
  return guarded([&] {
    const cluedex::dualflow::VerifyReport report = cluedex::dualflow::verify(seed);
    if (all_pass_out != nullptr) *all_pass_out = report.all_pass ? 1 : 0;
    put_string(json_out, report.to_json());
    put_string(text_out, report.to_table());
  });
}

}  // extern "C"
