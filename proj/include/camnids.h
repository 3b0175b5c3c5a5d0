/* C interface to the camnids toolchain: ruleset parsing and generation,
 * table compilation, the cycle-level engine, Phase-3 rule completion, the
 * energy model and the sweep studies. All objects are opaque handles; every
 * fallible call returns a camnids_status and leaves a human-readable
 * message in camnids_last_error() on failure. Strings and buffers returned
 * through out-parameters are owned by the caller and released with
 * camnids_string_free / camnids_buffer_free unless noted otherwise.
 */
#ifndef CAMNIDS_H
#define CAMNIDS_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum camnids_status {
    CAMNIDS_OK = 0,
    CAMNIDS_ERR_USAGE = 1,           /* bad arguments or configuration */
    CAMNIDS_ERR_DATA = 2,            /* parse error or semantic violation */
    CAMNIDS_ERR_ORACLE_MISMATCH = 3, /* engine disagreed with the oracle */
    CAMNIDS_ERR_IO = 4,
    CAMNIDS_ERR_CAPACITY = 5 /* ruleset does not fit the configured arrays */
} camnids_status;

typedef struct camnids_ruleset camnids_ruleset;
typedef struct camnids_image camnids_image;
typedef struct camnids_result camnids_result;

/* Message for the most recent failing call on this thread. */
const char* camnids_last_error(void);
const char* camnids_version(void);
void camnids_string_free(char* s);
void camnids_buffer_free(uint8_t* p);

/* --- rulesets ---------------------------------------------------------- */

camnids_status camnids_ruleset_parse(const char* text, camnids_ruleset** out);
camnids_status camnids_ruleset_load(const char* path, camnids_ruleset** out);
camnids_status camnids_ruleset_generate(uint64_t seed, uint32_t n_patterns,
                                        uint32_t len_min, uint32_t len_max,
                                        double wildcard_frac,
                                        double multi_rule_frac,
                                        const char* config_json,
                                        camnids_ruleset** out);
/* Canonical grammar text; parsing it again reproduces the ruleset. */
camnids_status camnids_ruleset_print(const camnids_ruleset* rs, char** out_text);
size_t camnids_ruleset_pattern_count(const camnids_ruleset* rs);
size_t camnids_ruleset_rule_count(const camnids_ruleset* rs);
void camnids_ruleset_free(camnids_ruleset* rs);

/* Stream with controlled hit rate plus its ground-truth occurrence list
 * (CSV "pattern_id,start,end"). */
camnids_status camnids_gen_traffic(const camnids_ruleset* rs, uint64_t length,
                                   double hit_rate, uint64_t seed,
                                   uint8_t** out_stream, size_t* out_len,
                                   char** out_truth_csv);

/* --- compilation ------------------------------------------------------- */

/* config_json may be NULL for the default 4-stage, 8-PE, 4-bank geometry.
 * Keys: depth, n_pes, pe_rows, n_banks, bank_rows, w, stage_assignment. */
camnids_status camnids_compile(const camnids_ruleset* rs, const char* config_json,
                               camnids_image** out);
camnids_status camnids_image_write(const camnids_image* img, const char* path);
camnids_status camnids_image_read(const char* path, camnids_image** out);
camnids_status camnids_image_dump(const camnids_image* img, char** out_text);
camnids_status camnids_image_memory_report(const camnids_image* img,
                                           char** out_json);
void camnids_image_free(camnids_image* img);

typedef struct camnids_ac_stats {
    uint64_t n_states;
    uint64_t n_forward;
    uint64_t n_backward;
    uint32_t skipped_wildcard_patterns;
} camnids_ac_stats;

/* Conventional full-pattern automaton with failure transitions. */
camnids_status camnids_conventional_stats(const camnids_ruleset* rs,
                                          camnids_ac_stats* out);
/* Pipelined trie; n_backward is 0 by construction. */
camnids_status camnids_pipelined_stats(const camnids_ruleset* rs,
                                       const char* config_json,
                                       camnids_ac_stats* out);

/* --- runs -------------------------------------------------------------- */

typedef struct camnids_run_options {
    int lanes;           /* 1 or 2; lane B mirrors stream A when b is NULL */
    int clock_gating;    /* skip matched suffix spans (default on) */
    int congestion_drop; /* 0 = stall on a full FIFO, 1 = drop and count */
    int queue_depth;     /* per-lane Phase-2 FIFO depth */
    int phase2_latency;  /* cycles per Phase-2 search */
    int oracle_check;    /* verify events (and rule hits when gating is off)
                            against the brute-force oracles */
} camnids_run_options;

void camnids_run_options_init(camnids_run_options* opt);

camnids_status camnids_run(const camnids_image* img, const uint8_t* stream_a,
                           size_t len_a, const uint8_t* stream_b, size_t len_b,
                           const camnids_run_options* opt,
                           const char* coeffs_json, camnids_result** out);

/* data is a u32 little-endian length-framed packet container; the engine
 * and Phase-3 state reset between packets. Event offsets are packet-local,
 * cycles accumulate across the run. */
camnids_status camnids_run_packets(const camnids_image* img, const uint8_t* data,
                                   size_t len, const camnids_run_options* opt,
                                   const char* coeffs_json, camnids_result** out);

camnids_status camnids_result_events_csv(const camnids_result* res, char** out);
camnids_status camnids_result_rule_hits_csv(const camnids_result* res, char** out);
camnids_status camnids_result_stats_json(const camnids_result* res, char** out);
camnids_status camnids_result_energy_json(const camnids_result* res, char** out);
void camnids_result_free(camnids_result* res);

/* --- sweeps ------------------------------------------------------------ */

camnids_status camnids_sweep_rulesize(uint64_t seed, const int* sizes,
                                      size_t n_sizes, const char* config_json,
                                      const char* coeffs_json, char** out_csv);
camnids_status camnids_sweep_hitrate(uint64_t seed, const double* rates,
                                     size_t n_rates, const char* config_json,
                                     const char* coeffs_json, char** out_csv);
camnids_status camnids_sweep_stages(uint64_t seed, const int* depths,
                                    size_t n_depths, const double* rates,
                                    size_t n_rates, const char* config_json,
                                    const char* coeffs_json, char** out_csv);

/* --- misc -------------------------------------------------------------- */

/* CSV "byte,code_hex" of the canonical fixed-1s codebook. */
camnids_status camnids_codebook_csv(char** out);
/* Cycles from first byte to match report for a full-depth pattern. */
int camnids_latency_cycles(int depth, int phase2_latency);

#ifdef __cplusplus
}
#endif

#endif /* CAMNIDS_H */
