/* C interface to the cluedex generative retrieval engine.
 *
 * All functions return CLUEDEX_OK or an error code; the message for the most
 * recent failure on the calling thread is available via cluedex_last_error().
 * Strings returned through char** out-parameters are heap-allocated and must
 * be released with cluedex_string_free(). Handles are opaque and must be
 * destroyed with their matching _destroy function. A handle may be shared
 * across threads only for read-only use.
 */
#ifndef CLUEDEX_H
#define CLUEDEX_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
  CLUEDEX_OK = 0,
  CLUEDEX_E_INVALID_ARGUMENT = 1,
  CLUEDEX_E_IO = 2,
  CLUEDEX_E_FORMAT = 3,
  CLUEDEX_E_CONFIG = 4,
  CLUEDEX_E_PROTOCOL = 5,
  CLUEDEX_E_TIMEOUT = 6,
  CLUEDEX_E_VOCAB_MISMATCH = 7,
  CLUEDEX_E_AMBIGUOUS = 8,
  CLUEDEX_E_ABSENT = 9,
  CLUEDEX_E_RUNTIME = 10,
  CLUEDEX_E_PANIC = 11 /* unexpected exception crossed the boundary */
};

/* Occurrence classes for cluedex_index_find. */
enum {
  CLUEDEX_MATCH_ABSENT = 0,
  CLUEDEX_MATCH_UNIQUE = 1,   /* all occurrences in one document */
  CLUEDEX_MATCH_AMBIGUOUS = 2 /* occurs in two or more documents */
};

const char* cluedex_version(void);

/* Message for the last failure on this thread; empty string if none. The
 * pointer stays valid until the next failing call on the same thread. */
const char* cluedex_last_error(void);

void cluedex_string_free(char* s);

/* ---- run configuration ------------------------------------------------- */

typedef struct cluedex_config cluedex_config;

cluedex_config* cluedex_config_create(void);
void cluedex_config_destroy(cluedex_config* config);

/* key = value lines with [section] headers; same keys as _set. */
int cluedex_config_load_file(cluedex_config* config, const char* path);

/* Dotted keys, e.g. "paths.corpus", "decode.num_beams", "scorer.kind".
 * Unknown keys and unparsable values fail with CLUEDEX_E_CONFIG. */
int cluedex_config_set(cluedex_config* config, const char* key, const char* value);

/* Full deterministic key dump (canonical form the config hash covers). */
int cluedex_config_dump(const cluedex_config* config, char** text_out);

/* 16 hex chars + NUL; buf_len must be at least 17. */
int cluedex_config_hash(const cluedex_config* config, char* buf, size_t buf_len);

/* ---- index handle ------------------------------------------------------ */

typedef struct cluedex_index cluedex_index;

/* Opens a container previously written by the build-index command. */
int cluedex_index_open(const char* path, cluedex_index** index_out);
void cluedex_index_destroy(cluedex_index* index);

uint32_t cluedex_index_num_docs(const cluedex_index* index);
uint64_t cluedex_index_num_tokens(const cluedex_index* index);
uint32_t cluedex_index_vocab_size(const cluedex_index* index);

/* 16 hex chars + NUL; buf_len must be at least 17. */
int cluedex_index_hash(const cluedex_index* index, char* buf, size_t buf_len);

/* Text -> token ids under the index's frozen vocabulary (unknown words map
 * to the unk id). Writes up to cap ids; *count_out is the full count, so a
 * larger buffer can be retried when *count_out > cap. */
int cluedex_tokenize(const cluedex_index* index, const char* text, uint32_t* tokens_out,
                     size_t cap, size_t* count_out);

/* Token ids -> space-joined text. */
int cluedex_detokenize(const cluedex_index* index, const uint32_t* tokens, size_t count,
                       char** text_out);

/* Occurrence lookup for a token sequence: how often it occurs, whether it is
 * unique to one document, and that document's id when it is. Any out-pointer
 * may be NULL. Empty sequences are invalid. */
int cluedex_index_find(const cluedex_index* index, const uint32_t* tokens, size_t count,
                       uint64_t* occurrences_out, int* match_out, uint32_t* doc_out);

/* Distinct tokens that can extend the sequence while staying a corpus
 * substring (the constrained decoder's candidate set). Works like
 * cluedex_tokenize: up to cap ids written, full count in *count_out. */
int cluedex_index_extensions(const cluedex_index* index, const uint32_t* tokens,
                             size_t count, uint32_t* tokens_out, size_t cap,
                             size_t* count_out);

/* Retrieves documents for one query against an open index. query_json is a
 * single queries.jsonl object, e.g. {"id":"q1","text":"...","oracle_clue":
 * "..."}; the result is the matching results.jsonl record. */
int cluedex_query_retrieve(const cluedex_index* index, const cluedex_config* config,
                           const char* query_json, char** result_json_out);

/* ---- whole-run commands (what the CLI subcommands call) ----------------- */

/* Each command reads the paths it needs from the config, writes any files
 * the config names, and reports through the optional out-parameters:
 * json_out gets a machine-readable report, text_out a human-aligned table.
 * Pass NULL for either. */
int cluedex_cmd_build_index(const cluedex_config* config, char** json_out,
                            char** text_out);
int cluedex_cmd_sample_clues(const cluedex_config* config, char** json_out,
                             char** text_out);
int cluedex_cmd_retrieve(const cluedex_config* config, char** json_out, char** text_out);
int cluedex_cmd_evaluate(const cluedex_config* config, char** json_out, char** text_out);
int cluedex_cmd_ablate(const cluedex_config* config, char** json_out, char** text_out);
int cluedex_cmd_bench_latency(const cluedex_config* config, char** json_out,
                              char** text_out);

/* Gradient checks, gate identities, and the toy training run for the gated
 * two-stream attention block. *all_pass_out is 1 when every check holds. */
int cluedex_verify_dualflow(uint64_t seed, int* all_pass_out, char** json_out,
                            char** text_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CLUEDEX_H */
