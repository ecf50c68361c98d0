/*
 * hemtfit - HEMT compact-model parameter extraction toolkit.
 *
 * C interface to the shared library. All functions returning
 * hemtfit_status set a thread-local message retrievable with
 * hemtfit_last_error() on failure. Objects created here must be
 * released with their matching _destroy/_free call.
 */
#ifndef HEMTFIT_H
#define HEMTFIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HEMTFIT_API __declspec(dllexport)
#else
#define HEMTFIT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hemtfit_status {
    HEMTFIT_OK = 0,
    HEMTFIT_ERR_INVALID_ARGUMENT = 1, /* bad parameters or config values */
    HEMTFIT_ERR_PARSE = 2,            /* malformed input text */
    HEMTFIT_ERR_EVAL = 3,             /* model evaluation failed */
    HEMTFIT_ERR_RUNTIME = 4           /* everything else (I/O, stage failures) */
} hemtfit_status;

HEMTFIT_API const char* hemtfit_version(void);

/* Message for the most recent failure on this thread. Valid until the
 * next failing call on the same thread. */
HEMTFIT_API const char* hemtfit_last_error(void);

/* Frees strings returned through char** out-parameters. */
HEMTFIT_API void hemtfit_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Search space                                                        */
/* ------------------------------------------------------------------ */

typedef struct hemtfit_space hemtfit_space;

HEMTFIT_API hemtfit_status hemtfit_space_create(hemtfit_space** out);
/* log10_scale: 0 = linear, nonzero = log10 (requires lower > 0). */
HEMTFIT_API hemtfit_status hemtfit_space_add(hemtfit_space* space, const char* name, double lower,
                                             double upper, int log10_scale);
/* The built-in device-independent spaces of the extraction stages. */
HEMTFIT_API hemtfit_status hemtfit_space_default_dc(hemtfit_space** out);
HEMTFIT_API hemtfit_status hemtfit_space_default_rf(hemtfit_space** out);
HEMTFIT_API size_t hemtfit_space_dimension(const hemtfit_space* space);
HEMTFIT_API void hemtfit_space_destroy(hemtfit_space* space);

/* ------------------------------------------------------------------ */
/* Optimizer                                                           */
/* ------------------------------------------------------------------ */

typedef struct hemtfit_optimizer_config {
    double gamma;       /* good/bad split fraction, in (0,1) */
    int n_startup;      /* uniform samples before TPE starts, >= 2 */
    int batch_size;     /* proposals per batch, >= 1 */
    int max_batches;    /* focused batches, >= 1 */
    double delta_init;  /* initial window contraction, [0,1); 0 = focusing off */
    double alpha_decay; /* contraction decay constant, > 0 */
    int n_grid;         /* quantization grid points per dimension, >= 2 */
    int n_candidates;   /* candidates scored per proposal, >= 1 */
    uint64_t rng_seed;
    int n_threads; /* concurrent objective evaluations per batch, >= 1 */
} hemtfit_optimizer_config;

/* Fills in the documented defaults. */
HEMTFIT_API void hemtfit_optimizer_config_init(hemtfit_optimizer_config* config);

/* Must be thread-safe when n_threads > 1 and pure (same theta -> same
 * loss). Return a nonnegative loss; +inf or NaN marks a failed
 * evaluation. */
typedef double (*hemtfit_objective_fn)(const double* theta, size_t dimension, void* user_data);

typedef struct hemtfit_result hemtfit_result;

HEMTFIT_API hemtfit_status hemtfit_optimize(const hemtfit_space* space,
                                            const hemtfit_optimizer_config* config,
                                            hemtfit_objective_fn objective, void* user_data,
                                            hemtfit_result** out);

HEMTFIT_API size_t hemtfit_result_dimension(const hemtfit_result* result);
HEMTFIT_API double hemtfit_result_best_loss(const hemtfit_result* result);
HEMTFIT_API hemtfit_status hemtfit_result_best_theta(const hemtfit_result* result, double* out,
                                                     size_t dimension);
HEMTFIT_API size_t hemtfit_result_trial_count(const hemtfit_result* result);
/* theta_out may be NULL when only loss/batch are wanted. */
HEMTFIT_API hemtfit_status hemtfit_result_trial(const hemtfit_result* result, size_t index,
                                                double* theta_out, size_t dimension,
                                                double* loss_out, int* batch_out);
/* `trial,batch,loss,<param names...>` */
HEMTFIT_API hemtfit_status hemtfit_result_write_trace_csv(const hemtfit_result* result,
                                                          const char* path);
HEMTFIT_API void hemtfit_result_destroy(hemtfit_result* result);

/* ------------------------------------------------------------------ */
/* Pipeline operations (what the CLI drives)                           */
/* ------------------------------------------------------------------ */

/* Chart raster + sidecars -> `vgs,vds,id` CSV. x_scale / y_scale are
 * "linear" or "log10" (NULL = linear). warnings_out, when non-NULL,
 * receives a newline-separated warning list (possibly empty). */
HEMTFIT_API hemtfit_status hemtfit_digitize_chart(const char* png_path,
                                                  const char* calibration_json_path,
                                                  const char* labels_json_path,
                                                  const char* x_scale, const char* y_scale,
                                                  const char* out_csv_path, char** warnings_out);

/* S-parameter table (.csv/.tsv magnitude-angle table, Touchstone .s2p,
 * or canonical CSV) -> canonical CSV. */
HEMTFIT_API hemtfit_status hemtfit_ingest_sparams(const char* input_path,
                                                  const char* out_csv_path);

/* Full extraction run from a config file. Optional overrides:
 * output_dir (NULL = config value), seed (negative = config value),
 * evaluator "surrogate"/"external" (NULL = config value).
 * report_json_out, when non-NULL, receives the report even if a stage
 * failed; the return value is HEMTFIT_OK only for a fully successful
 * run. */
HEMTFIT_API hemtfit_status hemtfit_run_extraction(const char* config_path,
                                                  const char* output_dir, int64_t seed,
                                                  const char* evaluator, char** report_json_out);

/* Summary statistics of an optimizer trace CSV. */
HEMTFIT_API hemtfit_status hemtfit_trace_report(const char* trace_csv_path, char** text_out);

/* Reference simulator: evaluates a hemtfit netlist at the points
 * listed in points_csv_path (`vgs,vds` rows for kind "iv", `freq_hz`
 * rows for kind "sparams") and returns the whitespace-delimited
 * result table. This is the in-process surrogate behind the external
 * simulator contract. */
HEMTFIT_API hemtfit_status hemtfit_simulate_netlist(const char* netlist_path,
                                                    const char* points_csv_path, const char* kind,
                                                    char** table_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* HEMTFIT_H */
