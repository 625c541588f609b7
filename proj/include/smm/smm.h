/* Apache License, Version 2.0, refer to LICENSE.txt */

/*
 * smm: staged mixture modeling engine.
 *
 * C interface to the engine: opaque handles plus status codes. Every
 * function that can fail returns smm_status; on failure a human-readable
 * message is available from smm_last_error() (thread-local, valid until the
 * next failing call on the same thread). Out-parameters are written only on
 * SMM_OK. All handles are freed with their matching *_free function; passing
 * NULL to a *_free is a no-op.
 *
 * Hyperparameters travel in an smm_params handle as key=value strings; see
 * the README for the full key list and defaults. Unknown keys and malformed
 * values fail with SMM_ERR_USAGE.
 */

#ifndef SMM_SMM_H
#define SMM_SMM_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum smm_status {
  SMM_OK = 0,
  SMM_ERR_USAGE = 1,  /* bad arguments, unknown keys, out-of-range values */
  SMM_ERR_DATA = 2,   /* unreadable/malformed files, schema mismatches */
  SMM_ERR_NUMERIC = 3 /* degenerate numerics, e.g. zero fractional count */
} smm_status;

typedef struct smm_params smm_params;
typedef struct smm_dataset smm_dataset;
typedef struct smm_model smm_model;
typedef struct smm_genspec smm_genspec;

const char* smm_version(void);
const char* smm_last_error(void);

/* ---- hyperparameters ---- */

smm_params* smm_params_create(void);
void smm_params_free(smm_params* params);
smm_status smm_params_set(smm_params* params, const char* key,
                          const char* value);

/* ---- datasets ---- */

smm_status smm_dataset_load_csv(const char* csv_path, const char* schema_path,
                                smm_dataset** out);
smm_status smm_dataset_save_csv(const smm_dataset* dataset,
                                const char* csv_path);
/* Deterministic shuffle split; |train| = round(fraction * N). */
smm_status smm_dataset_split(const smm_dataset* dataset, double fraction,
                             uint64_t seed, smm_dataset** train_out,
                             smm_dataset** holdout_out);
int64_t smm_dataset_num_cases(const smm_dataset* dataset);
void smm_dataset_free(smm_dataset* dataset);

/* ---- training and models ---- */

/*
 * Fits a staged mixture (params key mode=smm, default) or the single
 * unbounded-tree/network baseline (mode=baseline) on `train`. `test` may be
 * NULL; when given, per-stage test scores appear in the curve report.
 * `curve_csv_path` may be NULL to skip the report.
 */
smm_status smm_train(const smm_params* params, const smm_dataset* train,
                     const smm_dataset* test, const char* curve_csv_path,
                     smm_model** out);

smm_status smm_model_save(const smm_model* model, const char* path);
smm_status smm_model_load(const char* path, smm_model** out);
/* Loads a CSV against the schema embedded in the model. */
smm_status smm_model_load_dataset(const smm_model* model, const char* csv_path,
                                  smm_dataset** out);
int smm_model_num_components(const smm_model* model);
int smm_model_is_classifier(const smm_model* model);
void smm_model_free(smm_model* model);

/* Mean log predictive density (conditional on inputs for classifiers). */
smm_status smm_model_log_score(const smm_model* model,
                               const smm_dataset* dataset, double* out);
/* Classification accuracy; SMM_ERR_USAGE for density models. */
smm_status smm_model_accuracy(const smm_model* model,
                              const smm_dataset* dataset, double* out);
/* Per-case log predictive density. */
smm_status smm_model_case_log_prob(const smm_model* model,
                                   const smm_dataset* dataset,
                                   int64_t case_index, double* out);

/* ---- hyperparameter tuning ---- */

/*
 * Grid search over tune_leaf_grid x tune_pi_grid on an internal
 * tune_fraction split of `train`; writes the full holdout table when
 * `table_csv_path` is non-NULL and reports the winning pair.
 */
smm_status smm_tune(const smm_params* params, const smm_dataset* train,
                    const char* table_csv_path, int64_t* best_max_leaves,
                    double* best_pi_init);

/* ---- backfitting ---- */

/*
 * mode is "weights" (EM over all mixture weights) or "structure" (full SEM
 * sweeps). Writes the per-iteration report when report_csv_path is given
 * and returns the backfitted model.
 */
smm_status smm_backfit(const smm_params* params, const smm_model* model,
                       const smm_dataset* train, const char* mode,
                       const char* report_csv_path, smm_model** out);

/* ---- curve experiments ---- */

/*
 * Fits `components` stages once per schedule in the comma-separated list
 * (each "s1-s2-s3", or "smm" for 5-5-20) and writes one curve row per
 * stage. backfit_mode: "none", "weights" or "structure".
 */
smm_status smm_curve(const smm_params* params, const smm_dataset* train,
                     const smm_dataset* test, const char* schedules,
                     const char* backfit_mode, const char* out_csv_path);

/* ---- synthetic data ---- */

smm_status smm_genspec_load(const char* path, smm_genspec** out);
smm_status smm_genspec_sample(const smm_genspec* spec, int64_t n,
                              uint64_t seed, smm_dataset** out);
smm_status smm_genspec_case_log_density(const smm_genspec* spec,
                                        const smm_dataset* dataset,
                                        int64_t case_index, double* out);
void smm_genspec_free(smm_genspec* spec);

#ifdef __cplusplus
}
#endif

#endif /* SMM_SMM_H */
