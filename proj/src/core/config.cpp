#include "core/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "core/hash.hpp"

namespace cluedex {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw_error(ErrorCode::kConfig, "bad value for " + key + ": '" + value + "'");
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value);
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const std::uint64_t v = std::stoull(value, &used);
    if (used != value.size()) bad_value(key, value);
    return v;
  } catch (const Error&) {
    throw;
  } catch (...) {
    bad_value(key, value);
  }
}

std::uint32_t to_u32(const std::string& key, const std::string& value) {
  const std::uint64_t v = to_u64(key, value);
  if (v > 0xffffffffull) bad_value(key, value);
  return static_cast<std::uint32_t>(v);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) bad_value(key, value);
    return v;
  } catch (const Error&) {
    throw;
  } catch (...) {
    bad_value(key, value);
  }
}

// Accepts "1,5,10" or "[1, 5, 10]".
std::vector<std::string> split_list(std::string value) {
  if (!value.empty() && value.front() == '[' && value.back() == ']')
    value = value.substr(1, value.size() - 2);
  std::vector<std::string> parts;
  std::string item;
  std::istringstream is(value);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

std::string join_u32(const std::vector<std::uint32_t>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(v[i]);
  }
  return out + "]";
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string join_double(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt_double(v[i]);
  }
  return out + "]";
}

}  // namespace

void RunConfig::apply(const std::string& key, const std::string& value) {
  if (key == "paths.corpus") {
    corpus_path = value;
  } else if (key == "paths.index") {
    index_path = value;
  } else if (key == "paths.queries") {
    queries_path = value;
  } else if (key == "paths.results") {
    results_path = value;
  } else if (key == "paths.output") {
    output_path = value;
  } else if (key == "paths.stopwords") {
    stopwords_path = value;
  } else if (key == "seed") {
    seed = to_u64(key, value);
  } else if (key == "threads") {
    threads = to_u32(key, value);
  } else if (key == "sample_rate") {
    sample_rate = to_u32(key, value);
  } else if (key == "top_k") {
    top_k = to_u32(key, value);
  } else if (key == "force") {
    force = to_bool(key, value);
  } else if (key == "tokenizer.mode") {
    if (value == "word")
      tokenizer.mode = TokenizerMode::kWord;
    else if (value == "byte")
      tokenizer.mode = TokenizerMode::kByte;
    else
      bad_value(key, value);
  } else if (key == "tokenizer.lowercase") {
    tokenizer.lowercase = to_bool(key, value);
  } else if (key == "sampler.rho") {
    sampler.rho = to_double(key, value);
  } else if (key == "sampler.window") {
    sampler.n = to_u32(key, value);
  } else if (key == "sampler.num_samples") {
    sampler.m = to_u32(key, value);
  } else if (key == "sampler.clue_length") {
    sampler.l = to_u32(key, value);
  } else if (key == "scorer.kind") {
    if (value != "ngram" && value != "oracle" && value != "external") bad_value(key, value);
    scorer_kind = value;
  } else if (key == "ngram.order") {
    ngram.order = to_u32(key, value);
  } else if (key == "ngram.alpha") {
    ngram.alpha = to_double(key, value);
  } else if (key == "ngram.beta") {
    ngram.beta = to_double(key, value);
  } else if (key == "ngram.weights") {
    ngram.weights.clear();
    for (const std::string& part : split_list(value))
      ngram.weights.push_back(to_double(key, part));
  } else if (key == "external.transport") {
    if (value != "stdio" && value != "tcp") bad_value(key, value);
    external.transport = value;
  } else if (key == "external.command") {
    external.command = value;
  } else if (key == "external.host") {
    external.host = value;
  } else if (key == "external.port") {
    external.port = static_cast<int>(to_u32(key, value));
  } else if (key == "external.timeout_ms") {
    external.timeout_ms = static_cast<int>(to_u32(key, value));
  } else if (key == "decode.num_beams") {
    decode.num_beams = to_u32(key, value);
  } else if (key == "decode.num_groups") {
    decode.num_groups = to_u32(key, value);
  } else if (key == "decode.l_min") {
    decode.l_min = to_u32(key, value);
  } else if (key == "decode.l_max") {
    decode.l_max = to_u32(key, value);
  } else if (key == "decode.length_penalty") {
    decode.length_penalty = to_double(key, value);
  } else if (key == "decode.diversity_penalty") {
    decode.diversity_penalty = to_double(key, value);
  } else if (key == "decode.strategy") {
    decode.strategy = parse_strategy(value);
  } else if (key == "bench.docs") {
    bench_docs = to_u32(key, value);
  } else if (key == "bench.doc_tokens") {
    bench_doc_tokens = to_u32(key, value);
  } else if (key == "bench.vocab") {
    bench_vocab = to_u32(key, value);
  } else if (key == "bench.probes") {
    bench_probes = to_u32(key, value);
  } else if (key == "bench.decodes") {
    bench_decodes = to_u32(key, value);
  } else if (key == "eval.ks") {
    eval_ks.clear();
    for (const std::string& part : split_list(value)) eval_ks.push_back(to_u32(key, part));
  } else if (key == "eval.judge") {
    judge = parse_judge_mode(value);
  } else {
    throw_error(ErrorCode::kConfig, "unknown config key: " + key);
  }
}

void RunConfig::validate() const {
  sampler.validate();
  ngram.validate();
  decode.validate();
  if (scorer_kind == "external") external.validate();
  if (sample_rate == 0) throw_error(ErrorCode::kConfig, "sample_rate must be positive");
  if (top_k == 0) throw_error(ErrorCode::kConfig, "top_k must be positive");
  if (eval_ks.empty()) throw_error(ErrorCode::kConfig, "eval.ks must be non-empty");
}

std::string RunConfig::canonical() const {
  std::ostringstream os;
  os << "paths.corpus = " << corpus_path << "\n";
  os << "paths.index = " << index_path << "\n";
  os << "paths.queries = " << queries_path << "\n";
  os << "paths.results = " << results_path << "\n";
  os << "paths.output = " << output_path << "\n";
  os << "paths.stopwords = " << stopwords_path << "\n";
  os << "seed = " << seed << "\n";
  os << "threads = " << threads << "\n";
  os << "sample_rate = " << sample_rate << "\n";
  os << "top_k = " << top_k << "\n";
  os << "force = " << (force ? "true" : "false") << "\n";
  os << "tokenizer.mode = " << (tokenizer.mode == TokenizerMode::kWord ? "word" : "byte")
     << "\n";
  os << "tokenizer.lowercase = " << (tokenizer.lowercase ? "true" : "false") << "\n";
  os << "sampler.rho = " << fmt_double(sampler.rho) << "\n";
  os << "sampler.window = " << sampler.n << "\n";
  os << "sampler.num_samples = " << sampler.m << "\n";
  os << "sampler.clue_length = " << sampler.l << "\n";
  os << "scorer.kind = " << scorer_kind << "\n";
  os << "ngram.order = " << ngram.order << "\n";
  os << "ngram.alpha = " << fmt_double(ngram.alpha) << "\n";
  os << "ngram.beta = " << fmt_double(ngram.beta) << "\n";
  os << "ngram.weights = " << join_double(ngram.weights) << "\n";
  os << "external.transport = " << external.transport << "\n";
  os << "external.command = " << external.command << "\n";
  os << "external.host = " << external.host << "\n";
  os << "external.port = " << external.port << "\n";
  os << "external.timeout_ms = " << external.timeout_ms << "\n";
  os << "decode.num_beams = " << decode.num_beams << "\n";
  os << "decode.num_groups = " << decode.num_groups << "\n";
  os << "decode.l_min = " << decode.l_min << "\n";
  os << "decode.l_max = " << decode.l_max << "\n";
  os << "decode.length_penalty = " << fmt_double(decode.length_penalty) << "\n";
  os << "decode.diversity_penalty = " << fmt_double(decode.diversity_penalty) << "\n";
  os << "decode.strategy = " << strategy_name(decode.strategy) << "\n";
  os << "bench.docs = " << bench_docs << "\n";
  os << "bench.doc_tokens = " << bench_doc_tokens << "\n";
  os << "bench.vocab = " << bench_vocab << "\n";
  os << "bench.probes = " << bench_probes << "\n";
  os << "bench.decodes = " << bench_decodes << "\n";
  os << "eval.ks = " << join_u32(eval_ks) << "\n";
  os << "eval.judge = " << judge_mode_name(judge) << "\n";
  return os.str();
}

std::string RunConfig::config_hash() const { return hash_hex(fnv1a64(canonical())); }

void load_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorCode::kIo, "cannot open config file: " + path);
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // Strip comments, respecting double-quoted values.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    try {
      if (line.front() == '[') {
        if (line.back() != ']')
          throw_error(ErrorCode::kConfig, "unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw_error(ErrorCode::kConfig, "expected key = value");
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (key.empty()) throw_error(ErrorCode::kConfig, "empty key");
      if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
        value = value.substr(1, value.size() - 2);
      if (!section.empty()) key = section + "." + key;
      config.apply(key, value);
    } catch (const Error& e) {
      throw_error(e.code(), path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void apply_overrides(RunConfig& config,
                     const std::vector<std::pair<std::string, std::string>>& overrides) {
  for (const auto& [key, value] : overrides) config.apply(key, value);
}

}  // namespace cluedex
