/* Public C API of the riskgraph toolkit.
 *
 * All functions return rg_status; RG_OK on success. On failure the
 * thread-local message from rg_last_error() describes the problem.
 * Objects returned through out-parameters are owned by the caller and
 * released with the matching *_free function.
 */
#ifndef RISKGRAPH_H
#define RISKGRAPH_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rg_status {
  RG_OK = 0,
  RG_ERR_CONFIG = 2, /* bad configuration or input data */
  RG_ERR_NUMERIC = 3, /* numeric failure */
  RG_ERR_IO = 4 /* file I/O failure */
} rg_status;

typedef struct rg_patterns rg_patterns; /* opaque pattern set */
typedef struct rg_model rg_model;       /* opaque trained model */

/* Message for the most recent failure on this thread. */
const char* rg_last_error(void);

/* The scenario configuration shipped with the library (JSON text). */
const char* rg_default_scenario_json(void);

/* ---- pattern sets ---- */
rg_status rg_patterns_generate(const char* scenario_json_path, int count,
                               uint64_t seed, rg_patterns** out);
rg_status rg_patterns_load(const char* path, rg_patterns** out);
rg_status rg_patterns_save(const rg_patterns* patterns, const char* path);
rg_status rg_patterns_split(const rg_patterns* patterns, double train_fraction,
                            uint64_t seed, rg_patterns** train_out,
                            rg_patterns** validation_out);
int rg_patterns_count(const rg_patterns* patterns);
double rg_patterns_collision_fraction(const rg_patterns* patterns);
void rg_patterns_free(rg_patterns* patterns);

/* ---- scene encoding ---- */
/* Reads {"geometry": ..., "frames": [...]} and writes the graph record. */
rg_status rg_encode_scene_file(const char* scene_json_path,
                               const char* graph_json_path);

/* ---- training ---- */
/* train_config_json: {"optimizer":"qnts"|"bpts","m":...,"h":...,
 * "max_epochs":...,"tolerance":...,"learning_rate":...,"c_armijo":...,
 * "rho":...,"max_backtracks":...,"seed":...,"deterministic_reduction":...}.
 * report_path may be NULL; when given, per-epoch records are written as
 * line-delimited JSON. */
rg_status rg_model_train(const rg_patterns* patterns,
                         const char* train_config_json, rg_model** out,
                         const char* report_path);
rg_status rg_model_load(const char* path, rg_model** out);
rg_status rg_model_save(const rg_model* model, const char* path);
void rg_model_free(rg_model* model);

typedef struct rg_eval_metrics {
  double overall_generalization_pct;
  double collision_generalization_pct;
  long tp, fp, tn, fn;
  double threshold;
} rg_eval_metrics;

rg_status rg_evaluate(const rg_patterns* patterns, const rg_model* model,
                      double threshold, rg_eval_metrics* out);

/* ---- verification and reporting ---- */
/* Max relative error between analytic and finite-difference gradients over
 * `trials` random graph/parameter draws. */
rg_status rg_gradcheck(uint64_t seed, int trials, double* max_rel_error_out);

/* One-shot generate -> split -> train -> eval pipeline. Writes the JSON
 * report into the caller buffer (truncating if needed) and returns the
 * required size through report_size_out (either may be NULL). */
rg_status rg_repro_table3(uint64_t seed, int pattern_count, int max_epochs,
                          char* report_buf, int report_buf_size,
                          int* report_size_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* RISKGRAPH_H */
