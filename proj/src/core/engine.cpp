#include "core/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "core/external_scorer.hpp"
#include "core/hash.hpp"
#include "core/log.hpp"
#include "core/sampler.hpp"
#include "core/stopwords.hpp"
#include "core/synthetic.hpp"

namespace cluedex {

namespace {

ContainerWriter to_container(const KnowledgeBase& kb, const FmIndex& fm) {
  ContainerWriter w;
  kb.save_sections(w);
  fm.save_sections(w);
  return w;
}

std::unordered_set<std::string> run_stopwords(const RunConfig& config) {
  return config.stopwords_path.empty() ? default_stopwords()
                                       : load_stopwords(config.stopwords_path);
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double rank = p * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(rank);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

std::vector<Query> load_queries(const RunConfig& config, const KnowledgeBase& kb) {
  if (config.queries_path.empty())
    throw_error(ErrorCode::kConfig, "paths.queries is required");
  return read_queries_jsonl(config.queries_path, kb.tokenizer());
}

IndexArtifact open_index(const RunConfig& config) {
  if (config.index_path.empty())
    throw_error(ErrorCode::kConfig, "paths.index is required");
  return IndexArtifact::open(config.index_path);
}

}  // namespace

IndexArtifact IndexArtifact::build(const std::vector<RawDocument>& docs,
                                   const TokenizerConfig& tokenizer_config,
                                   std::uint32_t sample_rate) {
  IndexArtifact artifact;
  artifact.kb = KnowledgeBase::ingest(docs, tokenizer_config);
  artifact.fm = FmIndex::build(artifact.kb, sample_rate);
  artifact.index_hash = hash_hex(to_container(artifact.kb, artifact.fm).content_hash());
  return artifact;
}

void IndexArtifact::save(const std::string& path) const {
  to_container(kb, fm).write(path);
}

IndexArtifact IndexArtifact::open(const std::string& path) {
  ContainerReader r(path);
  IndexArtifact artifact;
  artifact.kb = KnowledgeBase::load_sections(r);
  artifact.fm = FmIndex::load_sections(r);
  artifact.index_hash = hash_hex(r.content_hash());
  return artifact;
}

std::unique_ptr<TokenScorer> make_scorer(const RunConfig& config,
                                         const IndexArtifact& index) {
  if (config.scorer_kind == "ngram")
    return std::make_unique<NgramScorer>(NgramScorer::train(index.kb, config.ngram));
  if (config.scorer_kind == "external") {
    ExternalScorerConfig ext = config.external;
    ext.vocab_size = index.fm.vocab_size();
    return ExternalScorer::connect(ext);
  }
  if (config.scorer_kind == "oracle") return nullptr;  // built per query
  throw_error(ErrorCode::kConfig, "unknown scorer kind: " + config.scorer_kind);
}

ResultsFile run_retrieval(const IndexArtifact& index, const std::vector<Query>& queries,
                          const RunConfig& config) {
  config.validate();
  if (queries.empty()) throw_error(ErrorCode::kInvalidArgument, "no queries to retrieve");

  const std::unordered_set<std::string> stopwords = run_stopwords(config);
  std::unique_ptr<TokenScorer> shared = make_scorer(config, index);
  if (!shared) {
    for (const Query& q : queries) {
      if (q.oracle_clue.empty())
        throw_error(ErrorCode::kConfig,
                    "oracle scorer requires a planted clue on every query (query " +
                        q.id + ")");
    }
  }

  // Context fields other than the scorer pointer are scorer-independent; the
  // placeholder is never scored against, it only seeds the shared context.
  const OracleScorer placeholder({kUnkToken}, index.fm.vocab_size());
  const TokenScorer* ctx_scorer = shared ? shared.get() : &placeholder;
  const DecodeContext base_ctx = DecodeContext::make(index.fm, *ctx_scorer, index.kb);

  std::uint32_t threads = config.threads ? config.threads
                                         : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<std::uint32_t>(threads, static_cast<std::uint32_t>(queries.size()));
  // The external scorer serializes over one connection; extra threads would
  // only contend on its lock.
  if (config.scorer_kind == "external") threads = 1;

  std::vector<ResultRecord> records(queries.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= queries.size()) return;
      try {
        const Query& q = queries[i];
        ScorerQuery sq;
        sq.tokens = q.text_tokens;
        sq.keywords = query_keywords(q.text_tokens, index.kb.tokenizer(), stopwords);

        std::unique_ptr<OracleScorer> oracle;
        DecodeContext ctx = base_ctx;
        if (!shared) {
          oracle = std::make_unique<OracleScorer>(q.oracle_clue, index.fm.vocab_size());
          ctx.scorer = oracle.get();
        }

        const RetrievalResult result = decode(sq, ctx, config.decode);
        ResultRecord rec;
        rec.query_id = q.id;
        rec.diagnostics = result.diagnostics;
        const std::size_t keep =
            std::min<std::size_t>(result.ranked.size(), config.top_k);
        for (std::size_t r = 0; r < keep; ++r) {
          const RankedDoc& rd = result.ranked[r];
          rec.ranked.push_back(
              {rd.doc_id, rd.score, index.kb.tokenizer().detokenize(rd.clue)});
        }
        records[i] = std::move(rec);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(queries.size());
        return;
      }
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::uint32_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  ResultsFile results;
  results.config_hash = config.config_hash();
  results.index_hash = index.index_hash;
  results.records = std::move(records);
  return results;
}

MetricReport evaluate_results(const IndexArtifact& index, const std::vector<Query>& queries,
                              const ResultsFile& results, const RunConfig& config) {
  if (results.index_hash != index.index_hash && !config.force)
    throw_error(ErrorCode::kConfig, "results were produced against index " +
                                        results.index_hash + " but the loaded index is " +
                                        index.index_hash + " (use force to override)");

  std::map<std::string, const Query*> by_id;
  for (const Query& q : queries) {
    if (!by_id.emplace(q.id, &q).second)
      throw_error(ErrorCode::kInvalidArgument, "duplicate query id: " + q.id);
  }

  std::vector<const Query*> ordered;
  std::vector<std::vector<std::uint32_t>> rankings;
  std::vector<std::string> missing;
  std::map<std::string, bool> seen;
  for (const ResultRecord& rec : results.records) {
    const auto it = by_id.find(rec.query_id);
    if (it == by_id.end()) {
      missing.push_back(rec.query_id);
      continue;
    }
    seen[rec.query_id] = true;
    ordered.push_back(it->second);
    std::vector<std::uint32_t> docs;
    for (const RankedEntry& e : rec.ranked) docs.push_back(e.doc_id);
    rankings.push_back(std::move(docs));
  }
  std::vector<std::string> unanswered;
  for (const Query& q : queries)
    if (!seen.count(q.id)) unanswered.push_back(q.id);
  if (!missing.empty() || !unanswered.empty()) {
    std::string msg = "query id mismatch between results and queries;";
    if (!missing.empty()) {
      msg += " results without a query:";
      for (const std::string& id : missing) msg += " " + id;
      msg += ";";
    }
    if (!unanswered.empty()) {
      msg += " queries without a result:";
      for (const std::string& id : unanswered) msg += " " + id;
    }
    throw_error(ErrorCode::kInvalidArgument, msg);
  }

  const RelevanceJudge judge(index.kb, config.judge);
  MetricReport report = compute_metrics(ordered, rankings, judge, config.eval_ks);
  report.config_hash = results.config_hash;
  report.index_hash = results.index_hash;
  return report;
}

BuildStats cmd_build_index(const RunConfig& config) {
  config.validate();
  if (config.corpus_path.empty())
    throw_error(ErrorCode::kConfig, "paths.corpus is required");
  if (config.index_path.empty())
    throw_error(ErrorCode::kConfig, "paths.index is required");

  const std::vector<RawDocument> docs = read_corpus_jsonl(config.corpus_path);
  const auto start = std::chrono::steady_clock::now();
  const IndexArtifact artifact =
      IndexArtifact::build(docs, config.tokenizer, config.sample_rate);
  artifact.save(config.index_path);
  const auto stop = std::chrono::steady_clock::now();

  BuildStats stats;
  stats.docs = artifact.kb.size();
  stats.tokens = artifact.kb.total_tokens();
  stats.vocab = artifact.kb.tokenizer().vocab_size();
  stats.seconds = std::chrono::duration<double>(stop - start).count();
  stats.index_hash = artifact.index_hash;
  return stats;
}

std::vector<ClueRecord> cmd_sample_clues(const RunConfig& config) {
  config.validate();
  const IndexArtifact index = open_index(config);
  const std::vector<Query> queries = load_queries(config, index.kb);
  const std::unordered_set<std::string> stopwords = run_stopwords(config);
  const std::uint64_t base_seed = stage_seed(config.seed, "sampler");

  std::vector<ClueRecord> records;
  for (const Query& q : queries) {
    if (q.gold_doc_ids.empty()) {
      CLUEDEX_LOG_INFO("query %s has no gold documents; skipped", q.id.c_str());
      continue;
    }
    const std::vector<TokenId> keywords =
        query_keywords(q.text_tokens, index.kb.tokenizer(), stopwords);
    for (const std::uint32_t doc_id : q.gold_doc_ids) {
      if (doc_id >= index.kb.size())
        throw_error(ErrorCode::kInvalidArgument,
                    "query " + q.id + " references missing document " +
                        std::to_string(doc_id));
      // Stable per (query, doc) regardless of batch composition.
      SamplerConfig sc = config.sampler;
      sc.seed = splitmix64(base_seed ^ fnv1a64(q.id) ^ (std::uint64_t(doc_id) << 1));
      std::mt19937_64 rng(sc.seed);
      const std::vector<SampledClue> clues =
          sample_clues(index.kb.doc(doc_id), index.kb.tokenizer(), keywords, sc, rng);
      for (const SampledClue& c : clues) {
        ClueRecord rec;
        rec.query_id = q.id;
        rec.doc_id = doc_id;
        rec.clue_tokens = c.tokens;
        rec.clue_text = index.kb.tokenizer().detokenize(c.tokens);
        rec.start = c.start;
        rec.sentence_index = c.sentence_index;
        records.push_back(std::move(rec));
      }
    }
  }
  if (!config.output_path.empty()) write_clues_jsonl(config.output_path, records);
  return records;
}

ResultsFile cmd_retrieve(const RunConfig& config) {
  const IndexArtifact index = open_index(config);
  const std::vector<Query> queries = load_queries(config, index.kb);
  ResultsFile results = run_retrieval(index, queries, config);
  if (!config.output_path.empty()) write_results_jsonl(config.output_path, results);
  return results;
}

MetricReport cmd_evaluate(const RunConfig& config) {
  config.validate();
  if (config.results_path.empty())
    throw_error(ErrorCode::kConfig, "paths.results is required");
  const IndexArtifact index = open_index(config);
  const std::vector<Query> queries = load_queries(config, index.kb);
  const ResultsFile results = read_results_jsonl(config.results_path);
  return evaluate_results(index, queries, results, config);
}

std::vector<std::pair<std::string, MetricReport>> cmd_ablate(const RunConfig& config) {
  config.validate();
  const IndexArtifact index = open_index(config);
  const std::vector<Query> queries = load_queries(config, index.kb);

  std::vector<std::pair<std::string, MetricReport>> reports;
  for (const DecodeStrategy strategy :
       {DecodeStrategy::kKnowledgeClue, DecodeStrategy::kFullDocument,
        DecodeStrategy::kFirstSentence, DecodeStrategy::kFreeText}) {
    RunConfig variant = config;
    variant.decode.strategy = strategy;
    const ResultsFile results = run_retrieval(index, queries, variant);
    MetricReport report = evaluate_results(index, queries, results, variant);
    report.extra["strategy"] = strategy_name(strategy);
    std::uint64_t discarded = 0;
    for (const ResultRecord& rec : results.records)
      discarded += rec.diagnostics.discarded_absent;
    report.extra["discarded_absent"] = std::to_string(discarded);
    reports.emplace_back(strategy_name(strategy), std::move(report));
  }
  return reports;
}

std::string BenchReport::to_table() const {
  std::ostringstream os;
  os << "index: " << index_docs << " docs, " << index_tokens << " tokens\n";
  os << "extend (" << extension_probes << " probes): p50 " << extend_p50_ms << " ms, p95 "
     << extend_p95_ms << " ms, max " << extend_max_ms << " ms\n";
  os << "decode (" << decodes << " runs): p50 " << decode_p50_ms << " ms, p95 "
     << decode_p95_ms << " ms, max " << decode_max_ms << " ms\n";
  return os.str();
}

BenchReport cmd_bench_latency(const RunConfig& config) {
  config.validate();
  IndexArtifact index;
  if (!config.index_path.empty()) {
    index = IndexArtifact::open(config.index_path);
  } else {
    CLUEDEX_LOG_INFO("no index path; building a synthetic %u x %u token corpus",
                     config.bench_docs, config.bench_doc_tokens);
    index = IndexArtifact::build(
        synthetic::random_docs(config.bench_docs, config.bench_doc_tokens,
                               config.bench_vocab, stage_seed(config.seed, "bench")),
        config.tokenizer, config.sample_rate);
  }

  BenchReport report;
  report.index_tokens = index.fm.stream_tokens();
  report.index_docs = index.fm.num_docs();

  // Extension latency: walk random corpus paths, timing every get_next.
  std::mt19937_64 rng(stage_seed(config.seed, "benchrng"));
  std::vector<double> extend_ms;
  std::vector<Extension> exts;
  while (extend_ms.size() < config.bench_probes) {
    SearchState state = index.fm.root();
    for (std::uint32_t depth = 0; depth < 8 && extend_ms.size() < config.bench_probes;
         ++depth) {
      const auto start = std::chrono::steady_clock::now();
      index.fm.get_next(state, exts);
      const auto stop = std::chrono::steady_clock::now();
      extend_ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
      if (exts.empty()) break;
      state = exts[rng() % exts.size()].state;
    }
  }
  report.extension_probes = extend_ms.size();
  report.extend_p50_ms = percentile(extend_ms, 0.50);
  report.extend_p95_ms = percentile(extend_ms, 0.95);
  report.extend_max_ms = percentile(extend_ms, 1.0);

  // Decode latency: queries built from random document windows.
  RunConfig decode_config = config;
  decode_config.scorer_kind = config.scorer_kind == "oracle" ? "ngram" : config.scorer_kind;
  const std::unique_ptr<TokenScorer> scorer = make_scorer(decode_config, index);
  const DecodeContext ctx = DecodeContext::make(index.fm, *scorer, index.kb);
  const std::unordered_set<std::string> stopwords = run_stopwords(config);

  std::vector<double> decode_ms;
  for (std::uint32_t i = 0; i < config.bench_decodes; ++i) {
    const Document& doc = index.kb.doc(rng() % index.kb.size());
    const std::size_t take = std::min<std::size_t>(doc.tokens.size(), 6);
    ScorerQuery sq;
    sq.tokens.assign(doc.tokens.begin(),
                     doc.tokens.begin() + static_cast<std::ptrdiff_t>(take));
    sq.keywords = query_keywords(sq.tokens, index.kb.tokenizer(), stopwords);
    const auto start = std::chrono::steady_clock::now();
    decode(sq, ctx, config.decode);
    const auto stop = std::chrono::steady_clock::now();
    decode_ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }
  report.decodes = decode_ms.size();
  report.decode_p50_ms = percentile(decode_ms, 0.50);
  report.decode_p95_ms = percentile(decode_ms, 0.95);
  report.decode_max_ms = percentile(decode_ms, 1.0);
  return report;
}

}  // namespace cluedex
