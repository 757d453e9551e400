/*
 * C API for the SQL statement grader: synthetic data generation, training,
 * cross-validation, prediction and offline metrics. All entry points return
 * a status code; sqlg_last_error() gives the diagnostic for the most recent
 * failure on the calling thread.
 */
#ifndef SQLGRADER_H
#define SQLGRADER_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SQLG_API __declspec(dllexport)
#else
#define SQLG_API __attribute__((visibility("default")))
#endif

typedef enum sqlg_status {
    SQLG_OK = 0,
    SQLG_ERR_USAGE = 1, /* bad argument or precondition */
    SQLG_ERR_DATA = 2,  /* malformed input data */
    SQLG_ERR_TRAIN = 3, /* training failed (divergence, NaN loss) */
    SQLG_ERR_IO = 4     /* file I/O, checkpoint version or checksum failure */
} sqlg_status;

/* Diagnostic message for the last failing call on this thread. */
SQLG_API const char* sqlg_last_error(void);

/* Rule-labeled synthetic corpus written as dataset CSV. n >= 8. class_counts
 * (nullable) receives the per-remark record counts
 * [Correct, PartiallyCorrect, Uninterpretable, Cheating]. */
SQLG_API sqlg_status sqlg_generate(size_t n, uint64_t seed, const char* out_csv,
                                   size_t class_counts[4]);

/* Train on a dataset CSV. mode is "joint" or "iterative"; history_out is
 * optional (JSON lines, one record per epoch). summary (nullable) receives a
 * short human-readable final-loss line. */
SQLG_API sqlg_status sqlg_train(const char* data_csv, const char* mode, size_t epochs,
                                size_t batch_size, uint64_t seed, int class_weighting,
                                const char* model_out, const char* history_out,
                                char* summary, size_t summary_len);

/* Cross-validate: scheme "kfold" (with k) or "loo". Writes pooled + per-fold
 * metrics JSON and out-of-fold predictions CSV. curves_dir is optional. jobs
 * is the fold-level parallelism; results do not depend on it. */
SQLG_API sqlg_status sqlg_xval(const char* data_csv, const char* scheme, size_t k,
                               const char* mode, size_t epochs, size_t batch_size,
                               uint64_t seed, int class_weighting, size_t jobs,
                               const char* metrics_out, const char* preds_out,
                               const char* curves_dir);

/* Opaque trained-model handle. */
typedef struct sqlg_model sqlg_model;

SQLG_API sqlg_status sqlg_model_load(const char* path, sqlg_model** out);
SQLG_API void sqlg_model_free(sqlg_model* model);

typedef struct sqlg_prediction {
    double p_correct;
    double remark_probs[4]; /* Correct, PartiallyCorrect, Uninterpretable, Cheating */
    double grade_hat;       /* in [0,1]; percent is grade_hat * 100 */
    double bottleneck_x;
    double bottleneck_y;
    int remark_argmax; /* index into remark_probs */
} sqlg_prediction;

SQLG_API sqlg_status sqlg_model_predict(const sqlg_model* model, const char* sql,
                                        sqlg_prediction* out);

/* Batch prediction over a dataset CSV; writes the predictions CSV. */
SQLG_API sqlg_status sqlg_model_predict_csv(const sqlg_model* model, const char* data_csv,
                                            const char* out_csv);

/* Recompute the metrics JSON offline from a predictions CSV and the labels
 * dataset CSV, aligned by submission_id. curves_dir is optional. */
SQLG_API sqlg_status sqlg_metrics(const char* preds_csv, const char* labels_csv,
                                  const char* out_json, const char* curves_dir);

/* Display name for a remark class index (0..3), or NULL if out of range. */
SQLG_API const char* sqlg_remark_name(int remark_class);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SQLGRADER_H */
