/*
 * wsnalloc C API.
 *
 * Opaque handles own their data; every *_free function accepts NULL.
 * Functions returning wsnalloc_status leave a message retrievable with
 * wsnalloc_last_error() (thread-local, valid until the next failing call on
 * the same thread).
 */
#ifndef WSNALLOC_H
#define WSNALLOC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(WSNALLOC_BUILDING)
#    define WSNALLOC_API __declspec(dllexport)
#  else
#    define WSNALLOC_API __declspec(dllimport)
#  endif
#else
#  define WSNALLOC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values 0..2 double as CLI exit codes. */
typedef enum wsnalloc_status {
    WSNALLOC_OK = 0,
    WSNALLOC_ERR_PARSE = 1,
    WSNALLOC_ERR_INFEASIBLE = 2,
    WSNALLOC_ERR_INVALID_ARGUMENT = 3,
    WSNALLOC_ERR_DIMENSION = 4,
    WSNALLOC_ERR_IO = 5,
    WSNALLOC_ERR_NUMERIC = 6,
    WSNALLOC_ERR_INTERNAL = 7
} wsnalloc_status;

typedef struct wsnalloc_config wsnalloc_config;
typedef struct wsnalloc_allocation wsnalloc_allocation;
typedef struct wsnalloc_codebook wsnalloc_codebook;

WSNALLOC_API const char* wsnalloc_version(void);
WSNALLOC_API const char* wsnalloc_last_error(void);
WSNALLOC_API const char* wsnalloc_status_name(wsnalloc_status status);

/* ---- configuration ---------------------------------------------------- */

WSNALLOC_API wsnalloc_status wsnalloc_config_load(const char* path, wsnalloc_config** out);
WSNALLOC_API wsnalloc_status wsnalloc_config_parse(const char* json_text, wsnalloc_config** out);
WSNALLOC_API void wsnalloc_config_free(wsnalloc_config* cfg);

WSNALLOC_API wsnalloc_status wsnalloc_config_set_seed(wsnalloc_config* cfg, uint64_t seed);
WSNALLOC_API wsnalloc_status wsnalloc_config_set_trials(wsnalloc_config* cfg, uint64_t trials);

/* First entry of the sensor-count grid. */
WSNALLOC_API size_t wsnalloc_config_k(const wsnalloc_config* cfg);
WSNALLOC_API double wsnalloc_config_sigma_theta2(const wsnalloc_config* cfg);
/* codebook_d0 when set, otherwise the first entry of d0_grid. */
WSNALLOC_API double wsnalloc_config_default_d0(const wsnalloc_config* cfg);
/* 0 when the config does not set codebook_bits. */
WSNALLOC_API unsigned wsnalloc_config_codebook_bits(const wsnalloc_config* cfg);
/* Output path named in the config ("results", "summary", "codebook",
 * "allocation", "table"), or NULL. */
WSNALLOC_API const char* wsnalloc_config_output(const wsnalloc_config* cfg, const char* name);

/* ---- allocation ------------------------------------------------------- */

/* Optimal L2-norm allocation for one realization given as arrays of length
 * k. On WSNALLOC_ERR_INFEASIBLE, *min_variance (if non-NULL) receives the
 * smallest achievable variance. */
WSNALLOC_API wsnalloc_status wsnalloc_allocate(size_t k, const double* h, const double* sigma_o2,
                                               const double* g, const double* sigma_c2,
                                               double sigma_theta2, double d0,
                                               wsnalloc_allocation** out, double* min_variance);

/* Same, reading the realization from a JSON file. d0 <= 0 selects the
 * file's "d0", falling back to the config default. */
WSNALLOC_API wsnalloc_status wsnalloc_allocate_file(const wsnalloc_config* cfg,
                                                    const char* realization_path, double d0,
                                                    wsnalloc_allocation** out,
                                                    double* min_variance);

WSNALLOC_API void wsnalloc_allocation_free(wsnalloc_allocation* a);
WSNALLOC_API size_t wsnalloc_allocation_k(const wsnalloc_allocation* a);
WSNALLOC_API size_t wsnalloc_allocation_k1(const wsnalloc_allocation* a);
WSNALLOC_API double wsnalloc_allocation_lambda0(const wsnalloc_allocation* a);
WSNALLOC_API double wsnalloc_allocation_cost(const wsnalloc_allocation* a);
WSNALLOC_API double wsnalloc_allocation_variance(const wsnalloc_allocation* a);
/* Copy a per-sensor vector into dst[0..len); len must equal k. */
WSNALLOC_API wsnalloc_status wsnalloc_allocation_b(const wsnalloc_allocation* a, double* dst, size_t len);
WSNALLOC_API wsnalloc_status wsnalloc_allocation_a2(const wsnalloc_allocation* a, double* dst, size_t len);
WSNALLOC_API wsnalloc_status wsnalloc_allocation_power(const wsnalloc_allocation* a, double* dst, size_t len);
WSNALLOC_API wsnalloc_status wsnalloc_allocation_write_json(const wsnalloc_allocation* a, const char* path);

/* ---- codebooks -------------------------------------------------------- */

/* Samples cfg training_m realizations at the first K of the config, solves
 * each, and runs Lloyd training. threads = 0 uses all cores. */
WSNALLOC_API wsnalloc_status wsnalloc_train_codebook(const wsnalloc_config* cfg, unsigned bits,
                                                     double d0, unsigned threads,
                                                     wsnalloc_codebook** out);
WSNALLOC_API wsnalloc_status wsnalloc_codebook_load(const char* path, wsnalloc_codebook** out);
WSNALLOC_API wsnalloc_status wsnalloc_codebook_save(const wsnalloc_codebook* book, const char* path);
WSNALLOC_API void wsnalloc_codebook_free(wsnalloc_codebook* book);
WSNALLOC_API unsigned wsnalloc_codebook_bits(const wsnalloc_codebook* book);
WSNALLOC_API size_t wsnalloc_codebook_k(const wsnalloc_codebook* book);
WSNALLOC_API size_t wsnalloc_codebook_iterations(const wsnalloc_codebook* book);
WSNALLOC_API size_t wsnalloc_codebook_skipped(const wsnalloc_codebook* book);
WSNALLOC_API double wsnalloc_codebook_final_distortion(const wsnalloc_codebook* book);
WSNALLOC_API double wsnalloc_codebook_d0(const wsnalloc_codebook* book);
WSNALLOC_API wsnalloc_status wsnalloc_codebook_entry(const wsnalloc_codebook* book, size_t index,
                                                     double* dst, size_t len);
WSNALLOC_API wsnalloc_status wsnalloc_codebook_select(const wsnalloc_codebook* book,
                                                      double optimal_cost, size_t* index);

/* ---- Monte-Carlo drivers ---------------------------------------------- */

/* Records CSV and summary JSON. book may be NULL. */
WSNALLOC_API wsnalloc_status wsnalloc_simulate(const wsnalloc_config* cfg,
                                               const wsnalloc_codebook* book, unsigned threads,
                                               const char* csv_path, const char* summary_path);

/* Full-feedback pass plus one pass per codebook on shared realizations.
 * Writes the comparison table, all records and the combined summary. */
WSNALLOC_API wsnalloc_status wsnalloc_eval_feedback(const wsnalloc_config* cfg,
                                                    const wsnalloc_codebook* const* books,
                                                    size_t n_books, unsigned threads,
                                                    const char* table_path,
                                                    const char* records_path,
                                                    const char* summary_path);

#ifdef __cplusplus
}
#endif

#endif /* WSNALLOC_H */
