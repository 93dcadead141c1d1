/*
 * C interface to the routewise library.
 *
 * Objects are opaque handles created by rw_*_open / rw_* functions and
 * released with the matching rw_*_free. Every fallible call returns an
 * rw_status; on failure rw_last_error() describes what went wrong. The
 * message is thread-local and stays valid until the next failing call on the
 * same thread.
 *
 * Handles are immutable once created and may be shared between threads for
 * reading.
 */
#ifndef ROUTEWISE_H
#define ROUTEWISE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(ROUTEWISE_BUILDING)
#    define RW_API __declspec(dllexport)
#  else
#    define RW_API __declspec(dllimport)
#  endif
#else
#  define RW_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rw_status {
    RW_OK = 0,
    RW_ERR_INVALID_ARGUMENT = 1,
    RW_ERR_EMPTY_CONTEXT = 2,
    RW_ERR_INCONSISTENT_EMBEDDINGS = 3,
    RW_ERR_ENSEMBLE_TOO_SMALL = 4,
    RW_ERR_DEGENERATE_TRIPLET = 5,
    RW_ERR_NEIGHBORHOOD_TOO_LARGE = 6,
    RW_ERR_EMPTY_POOL = 7,
    RW_ERR_DUPLICATE_ID = 8,
    RW_ERR_PARSE = 9,
    RW_ERR_IO = 10,
    RW_ERR_UNDEFINED = 11,
    RW_ERR_INTERNAL = 100
} rw_status;

RW_API const char* rw_status_name(rw_status status);
RW_API const char* rw_last_error(void);
RW_API const char* rw_version(void);

typedef struct rw_dataset rw_dataset;
typedef struct rw_estimates rw_estimates;
typedef struct rw_decisions rw_decisions;
typedef struct rw_simulation rw_simulation;
typedef struct rw_report rw_report;

/* ---- datasets ---------------------------------------------------------- */

/* Loads a manifest and every file it references, cross-checking ids. */
RW_API rw_status rw_dataset_open_manifest(const char* path, rw_dataset** out);
/* Loads a bare embedding file (JSON Lines or SMB1, detected by magic). */
RW_API rw_status rw_dataset_open_embeddings(const char* path, rw_dataset** out);
/* Copies n x m x d row-major values. generator_names and input_keys may be
 * NULL; input_keys, when given, is n x key_dim. */
RW_API rw_status rw_dataset_from_arrays(size_t n, size_t m, size_t d, const char* const* sample_ids,
                                        const char* const* generator_names, const double* values,
                                        const double* input_keys, size_t key_dim, rw_dataset** out);
RW_API void rw_dataset_free(rw_dataset* dataset);

RW_API size_t rw_dataset_size(const rw_dataset* dataset);
RW_API size_t rw_dataset_generators(const rw_dataset* dataset);
RW_API size_t rw_dataset_dim(const rw_dataset* dataset);
RW_API const char* rw_dataset_sample_id(const rw_dataset* dataset, size_t sample);
RW_API const char* rw_dataset_generator_name(const rw_dataset* dataset, size_t generator);
RW_API int rw_dataset_has_generations(const rw_dataset* dataset);
RW_API int rw_dataset_has_labels(const rw_dataset* dataset);
/* Copies one generator embedding (d values) into out. */
RW_API rw_status rw_dataset_embedding(const rw_dataset* dataset, size_t sample, size_t generator, double* out,
                                      size_t capacity);

typedef enum rw_format { RW_FORMAT_JSONL = 0, RW_FORMAT_SMB1 = 1 } rw_format;

/* provenance_json may be NULL; SMB1 files carry no provenance. */
RW_API rw_status rw_dataset_write_embeddings(const rw_dataset* dataset, const char* path, rw_format format,
                                             const char* provenance_json);

/* ---- estimation -------------------------------------------------------- */

typedef enum rw_mode { RW_MODE_GLOBAL = 0, RW_MODE_LOCAL = 1, RW_MODE_TRAIN = 2 } rw_mode;
typedef enum rw_metric { RW_METRIC_EUCLIDEAN = 0, RW_METRIC_COSINE = 1 } rw_metric;

typedef struct rw_estimate_options {
    rw_mode mode;
    size_t n0;        /* local and train modes; default 1 */
    rw_metric metric; /* neighbor metric; default euclidean */
} rw_estimate_options;

RW_API void rw_estimate_options_init(rw_estimate_options* options);

/* train_pool is required in train mode and ignored otherwise. */
RW_API rw_status rw_estimate(const rw_dataset* data, const rw_dataset* train_pool,
                             const rw_estimate_options* options, rw_estimates** out);
RW_API void rw_estimates_free(rw_estimates* estimates);
RW_API size_t rw_estimates_size(const rw_estimates* estimates);
RW_API size_t rw_estimates_generators(const rw_estimates* estimates);
RW_API rw_status rw_estimates_scores(const rw_estimates* estimates, size_t sample, double* out, size_t capacity);
/* Total clamped triplets across all samples. */
RW_API size_t rw_estimates_clamped_triplets(const rw_estimates* estimates);
RW_API rw_status rw_estimates_write(const rw_estimates* estimates, const char* path, const char* provenance_json);

/* ---- routing ----------------------------------------------------------- */

RW_API rw_status rw_route(const rw_estimates* estimates, rw_decisions** out);
RW_API void rw_decisions_free(rw_decisions* decisions);
RW_API size_t rw_decisions_size(const rw_decisions* decisions);
/* SIZE_MAX when sample is out of range. */
RW_API size_t rw_decisions_chosen(const rw_decisions* decisions, size_t sample);
/* source may be NULL; when it carries generations the chosen text is written
 * alongside each decision. */
RW_API rw_status rw_decisions_write(const rw_decisions* decisions, const rw_dataset* source, const char* path,
                                    const char* provenance_json);

/* ---- simulation -------------------------------------------------------- */

typedef enum rw_region_rule { RW_REGIONS_ROUND_ROBIN = 0, RW_REGIONS_CONTIGUOUS = 1 } rw_region_rule;

typedef struct rw_sim_config {
    size_t n;
    size_t m;
    size_t d;
    const double* theta;   /* theta_profiles x m, row-major */
    size_t theta_profiles;
    size_t regions;        /* 1 for a homogeneous dataset */
    rw_region_rule rule;
    double region_spread;
    double centroid_distance;
    uint64_t seed;
} rw_sim_config;

RW_API void rw_sim_config_init(rw_sim_config* config);
RW_API rw_status rw_simulate(const rw_sim_config* config, rw_simulation** out);
RW_API void rw_simulation_free(rw_simulation* simulation);
RW_API rw_status rw_simulation_dataset(const rw_simulation* simulation, rw_dataset** out);
/* Writes the embeddings (JSON Lines), the truth sidecar and, when
 * manifest_path is not NULL, a manifest pointing at the embeddings. */
RW_API rw_status rw_simulation_write(const rw_simulation* simulation, const char* embeddings_path,
                                     const char* truth_path, const char* manifest_path,
                                     const char* provenance_json);

/* ---- evaluation -------------------------------------------------------- */

RW_API rw_status rw_evaluate_truth(const char* estimates_path, const char* truth_path, rw_report** out);

typedef struct rw_eval_options {
    const char* val_labels_path; /* optional labeled validation set */
    size_t val_size;             /* default 50 */
    size_t val_draws;            /* default 10 */
    uint64_t seed;
    size_t knn_k;                /* default 20 */
} rw_eval_options;

RW_API void rw_eval_options_init(rw_eval_options* options);
/* labeled must carry labels (and generations when labels lack quality
 * vectors). options may be NULL. */
RW_API rw_status rw_evaluate_routing(const char* decisions_path, const rw_dataset* labeled,
                                     const rw_eval_options* options, rw_report** out);
RW_API void rw_report_free(rw_report* report);
/* Returns 1 and stores the value when the metric exists, else 0. */
RW_API int rw_report_metric(const rw_report* report, const char* name, double* value);
RW_API int rw_report_spearman(const rw_report* report, double* value);
RW_API rw_status rw_report_write(const rw_report* report, const char* json_path, const char* csv_path,
                                 const char* provenance_json);

/* ---- output validation ------------------------------------------------- */

typedef enum rw_output_kind {
    RW_OUTPUT_EMBEDDINGS = 0,
    RW_OUTPUT_ESTIMATES = 1,
    RW_OUTPUT_DECISIONS = 2,
    RW_OUTPUT_TRUTH = 3,
    RW_OUTPUT_REPORT = 4
} rw_output_kind;

/* Re-reads a written file and checks it parses as `kind` with
 * expected_rows samples (ignored for reports). */
RW_API rw_status rw_validate_output(const char* path, rw_output_kind kind, size_t expected_rows);

#ifdef __cplusplus
}
#endif

#endif /* ROUTEWISE_H */
