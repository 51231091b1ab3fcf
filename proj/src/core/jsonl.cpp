#include "core/jsonl.hpp"

#include <fstream>
#include <functional>

#include <json.hpp>

namespace cluedex {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void line_error(const std::string& path, std::size_t line_no,
                             const std::string& message) {
  throw_error(ErrorCode::kFormat, path + ":" + std::to_string(line_no) + ": " + message);
}

// Applies fn to each non-empty line; parse and shape errors cite the line.
void for_each_line(const std::string& path,
                   const std::function<void(std::size_t, const json&)>& fn) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorCode::kIo, "cannot open file: " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      line_error(path, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) line_error(path, line_no, "expected a JSON object");
    try {
      fn(line_no, j);
    } catch (const Error&) {
      throw;
    } catch (const json::exception& e) {
      line_error(path, line_no, e.what());
    }
  }
}

std::string id_to_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  throw_error(ErrorCode::kFormat, "id must be a string or integer");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_error(ErrorCode::kIo, "cannot write file: " + path);
  return out;
}

}  // namespace

std::vector<RawDocument> read_corpus_jsonl(const std::string& path) {
  std::vector<RawDocument> docs;
  for_each_line(path, [&](std::size_t line_no, const json& j) {
    if (!j.contains("text") || !j.at("text").is_string())
      line_error(path, line_no, "missing string field 'text'");
    RawDocument d;
    d.text = j.at("text").get<std::string>();
    if (j.contains("title")) {
      if (!j.at("title").is_string())
        line_error(path, line_no, "field 'title' must be a string");
      d.title = j.at("title").get<std::string>();
    }
    docs.push_back(std::move(d));
  });
  return docs;
}

std::vector<Query> read_queries_jsonl(const std::string& path, const Tokenizer& tokenizer) {
  std::vector<Query> queries;
  for_each_line(path, [&](std::size_t line_no, const json& j) {
    if (!j.contains("id")) line_error(path, line_no, "missing field 'id'");
    if (!j.contains("text") || !j.at("text").is_string())
      line_error(path, line_no, "missing string field 'text'");
    Query q;
    q.id = id_to_string(j.at("id"));
    q.raw_text = j.at("text").get<std::string>();
    q.text_tokens = tokenizer.tokenize_frozen(q.raw_text);
    if (q.text_tokens.empty()) line_error(path, line_no, "query text has no tokens");
    if (j.contains("answers")) {
      for (const json& a : j.at("answers")) {
        if (!a.is_string()) line_error(path, line_no, "answers must be strings");
        q.answers.push_back(a.get<std::string>());
      }
    }
    if (j.contains("gold_doc_ids"))
      for (const json& g : j.at("gold_doc_ids"))
        q.gold_doc_ids.push_back(g.get<std::uint32_t>());
    if (j.contains("feature"))
      for (const json& f : j.at("feature")) q.feature.push_back(f.get<double>());
    if (j.contains("oracle_clue")) {
      if (!j.at("oracle_clue").is_string())
        line_error(path, line_no, "field 'oracle_clue' must be a string");
      q.oracle_clue = tokenizer.tokenize_frozen(j.at("oracle_clue").get<std::string>());
    }
    queries.push_back(std::move(q));
  });
  return queries;
}

void write_clues_jsonl(const std::string& path, const std::vector<ClueRecord>& clues) {
  std::ofstream out = open_out(path);
  for (const ClueRecord& c : clues) {
    json j;
    j["query_id"] = c.query_id;
    j["doc_id"] = c.doc_id;
    j["clue_tokens"] = c.clue_tokens;
    j["clue_text"] = c.clue_text;
    j["start"] = c.start;
    j["sentence_index"] = c.sentence_index;
    out << j.dump() << "\n";
  }
}

std::vector<ClueRecord> read_clues_jsonl(const std::string& path) {
  std::vector<ClueRecord> clues;
  for_each_line(path, [&](std::size_t line_no, const json& j) {
    ClueRecord c;
    if (!j.contains("query_id") || !j.contains("doc_id") || !j.contains("clue_tokens"))
      line_error(path, line_no, "missing clue fields");
    c.query_id = id_to_string(j.at("query_id"));
    c.doc_id = j.at("doc_id").get<std::uint32_t>();
    c.clue_tokens = j.at("clue_tokens").get<std::vector<TokenId>>();
    if (j.contains("clue_text")) c.clue_text = j.at("clue_text").get<std::string>();
    if (j.contains("start")) c.start = j.at("start").get<std::uint64_t>();
    if (j.contains("sentence_index"))
      c.sentence_index = j.at("sentence_index").get<std::uint64_t>();
    clues.push_back(std::move(c));
  });
  return clues;
}

void write_results_jsonl(const std::string& path, const ResultsFile& results) {
  std::ofstream out = open_out(path);
  json meta;
  meta["config_hash"] = results.config_hash;
  meta["index_hash"] = results.index_hash;
  out << meta.dump() << "\n";
  for (const ResultRecord& r : results.records) {
    json j;
    j["query_id"] = r.query_id;
    json ranked = json::array();
    for (const RankedEntry& e : r.ranked) {
      json je;
      je["doc_id"] = e.doc_id;
      je["score"] = e.score;
      je["clue_text"] = e.clue_text;
      ranked.push_back(std::move(je));
    }
    j["ranked"] = std::move(ranked);
    json diag;
    diag["finalized"] = r.diagnostics.finalized;
    diag["dropped_ambiguous"] = r.diagnostics.dropped_ambiguous;
    diag["dead_ends"] = r.diagnostics.dead_ends;
    diag["discarded_absent"] = r.diagnostics.discarded_absent;
    j["diagnostics"] = std::move(diag);
    out << j.dump() << "\n";
  }
}

ResultsFile read_results_jsonl(const std::string& path) {
  ResultsFile results;
  bool meta_seen = false;
  for_each_line(path, [&](std::size_t line_no, const json& j) {
    if (!meta_seen) {
      if (!j.contains("config_hash") || !j.contains("index_hash"))
        line_error(path, line_no, "first line must carry config_hash and index_hash");
      results.config_hash = j.at("config_hash").get<std::string>();
      results.index_hash = j.at("index_hash").get<std::string>();
      meta_seen = true;
      return;
    }
    ResultRecord r;
    if (!j.contains("query_id") || !j.contains("ranked"))
      line_error(path, line_no, "missing result fields");
    r.query_id = id_to_string(j.at("query_id"));
    for (const json& je : j.at("ranked")) {
      RankedEntry e;
      e.doc_id = je.at("doc_id").get<std::uint32_t>();
      e.score = je.at("score").get<double>();
      if (je.contains("clue_text")) e.clue_text = je.at("clue_text").get<std::string>();
      r.ranked.push_back(std::move(e));
    }
    if (j.contains("diagnostics")) {
      const json& diag = j.at("diagnostics");
      r.diagnostics.finalized = diag.value("finalized", std::uint64_t{0});
      r.diagnostics.dropped_ambiguous = diag.value("dropped_ambiguous", std::uint64_t{0});
      r.diagnostics.dead_ends = diag.value("dead_ends", std::uint64_t{0});
      r.diagnostics.discarded_absent = diag.value("discarded_absent", std::uint64_t{0});
    }
    results.records.push_back(std::move(r));
  });
  if (!meta_seen) throw_error(ErrorCode::kFormat, path + ": empty results file");
  return results;
}

}  // namespace cluedex
