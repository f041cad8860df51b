/* C interface to the MOSS training library.
 *
 * All functions return a moss_status (MOSS_OK on success); the most recent
 * failure's detail is available from moss_last_error() on the same thread.
 * Strings returned through char** out-parameters are heap-allocated and must
 * be released with moss_string_free().
 *
 * A moss_run is an opaque handle binding a validated config, a seed, and an
 * output directory. Each training entry point executes one complete run and
 * writes its artifacts (metrics.csv, checkpoints, score.json, ...) under the
 * run's output directory. Handles are not thread-safe; use one handle per
 * thread.
 */
#ifndef MOSS_H
#define MOSS_H

#include <stdint.h>

#if defined(_WIN32)
#define MOSS_API __declspec(dllexport)
#else
#define MOSS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef int32_t moss_status;

enum {
    MOSS_OK = 0,
    MOSS_ERR_INVALID_ARGUMENT = 1,
    MOSS_ERR_CONFIG = 2,
    MOSS_ERR_IO = 3,
    MOSS_ERR_STATE = 4,
    MOSS_ERR_TRAINING = 5,
    MOSS_ERR_INTERNAL = 6
};

enum {
    MOSS_MODE_MAXIMIZE = 0,
    MOSS_MODE_MINIMIZE = 1,
    MOSS_MODE_BOTH = -1
};

typedef struct moss_run moss_run;

MOSS_API const char* moss_version(void);
MOSS_API const char* moss_status_name(moss_status status);

/* Message describing the last error on this thread; empty string if none. */
MOSS_API const char* moss_last_error(void);

MOSS_API void moss_string_free(char* text);

/* Canonical JSON config for a named profile ("desk" or "paper"). */
MOSS_API moss_status moss_default_config(const char* profile, char** json_out);

/* Schema- and range-validates a JSON config document. */
MOSS_API moss_status moss_validate_config(const char* config_json);

MOSS_API moss_status moss_run_open(const char* config_json, uint64_t seed,
                                   const char* out_dir, moss_run** run_out);
MOSS_API void moss_run_close(moss_run* run);

/* Unsupervised pretraining for config run.pretrain_steps environment steps.
 * resume_checkpoint may be NULL; when set, training continues from that
 * snapshot (same config required). On success *checkpoint_path_out (if
 * non-NULL) receives the final checkpoint path. */
MOSS_API moss_status moss_run_pretrain(moss_run* run, const char* resume_checkpoint,
                                       char** checkpoint_path_out);

/* Finetunes on the config's task for run.finetune_steps steps, starting from
 * a pretrained checkpoint (NULL = from scratch). *score_out receives the
 * final evaluation score. */
MOSS_API moss_status moss_run_finetune(moss_run* run, const char* checkpoint,
                                       double* score_out);

/* From-scratch baseline run with the expert budget
 * (finetune_steps * expert_multiplier); *score_out receives the expert
 * score used as the task's normalization constant. */
MOSS_API moss_status moss_run_expert(moss_run* run, double* score_out);

/* Frozen-policy rollouts with skills from one prior (or both). Writes
 * eval.csv under the run directory; *proxy_max_out / *proxy_min_out (each
 * optional) receive the mean particle-entropy proxy of the episodes rolled
 * with maximize / minimize skills. */
MOSS_API moss_status moss_run_evaluate(moss_run* run, const char* checkpoint, int32_t mode,
                                       int32_t episodes, double* proxy_max_out,
                                       double* proxy_min_out);

/* Aggregates finetune scores (CSV "task,seed,score") against expert scores
 * (CSV "task,score"): expert-normalized IQM, optimality gap, mean/median,
 * trimmed mean with stratified-bootstrap CIs, plus the performance-profile
 * table. Writes <out_prefix>report.csv and <out_prefix>profile.csv; if
 * table_out is non-NULL it receives a human-readable table. */
MOSS_API moss_status moss_stats_report(const char* scores_csv, const char* experts_csv,
                                       const char* out_prefix, uint64_t bootstrap_seed,
                                       int64_t resamples, char** table_out);

#ifdef __cplusplus
}
#endif

#endif /* MOSS_H */
