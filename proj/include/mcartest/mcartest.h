/*
 * mcartest C API.
 *
 * Opaque dataset handles, plain result structs and status codes. Every
 * function that can fail returns an mcar_status; the message for the most
 * recent failure on the calling thread is available from mcar_last_error().
 * Strings returned through char** out-parameters are owned by the caller and
 * must be released with mcar_string_free().
 */
#ifndef MCARTEST_MCARTEST_H
#define MCARTEST_MCARTEST_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(MCARTEST_BUILDING_DLL)
#define MCAR_API __declspec(dllexport)
#else
#define MCAR_API __declspec(dllimport)
#endif
#else
#define MCAR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct mcar_dataset mcar_dataset;

typedef enum mcar_status {
  MCAR_OK = 0,
  MCAR_E_USAGE = 2,    /* bad argument, malformed scenario/spec JSON */
  MCAR_E_DATA = 3,     /* unparseable or unsuitable data */
  MCAR_E_SINGULAR = 4, /* covariance estimate not positive definite */
  MCAR_E_IO = 5,
  MCAR_E_INTERNAL = 6
} mcar_status;

typedef enum mcar_method {
  MCAR_TEST_AN = 0,
  MCAR_TEST_DN = 1,
  MCAR_TEST_D2_UNIVARIATE = 2,
  MCAR_TEST_D2_GENERAL = 3,
  MCAR_TEST_D2_AUTO = 4 /* univariate closed form when q == 1, else general */
} mcar_method;

typedef struct mcar_result {
  mcar_method method; /* never MCAR_TEST_D2_AUTO */
  double statistic;
  int df;
  double p_value;
  double alpha;
  int reject;
} mcar_result;

typedef void (*mcar_progress_fn)(size_t done, size_t total, void* user);

MCAR_API const char* mcar_version(void);
MCAR_API const char* mcar_last_error(void);
MCAR_API void mcar_string_free(char* s);

/* Parses "an", "dn", "d2", "d2_general", "d2_univariate" (and the long names). */
MCAR_API mcar_status mcar_method_parse(const char* name, mcar_method* out);
MCAR_API const char* mcar_method_name(mcar_method m);

/* ---- datasets ---------------------------------------------------------- */

/* na_tokens may be NULL / na_count 0 for the defaults "NA", "NaN", "".
 * roles may be NULL (complete columns inferred) or "X1,X2:Y1" by name or
 * 1-based index. */
MCAR_API mcar_status mcar_dataset_load_csv(const char* path, const char* const* na_tokens,
                                           size_t na_count, const char* roles,
                                           mcar_dataset** out);

/* Row-major n*d values and mask (nonzero = observed). names may be NULL. */
MCAR_API mcar_status mcar_dataset_from_arrays(const double* values, const unsigned char* mask,
                                              size_t n, size_t d, const char* const* names,
                                              mcar_dataset** out);

MCAR_API mcar_status mcar_dataset_set_roles(mcar_dataset* ds, const char* roles);
MCAR_API void mcar_dataset_free(mcar_dataset* ds);

MCAR_API size_t mcar_dataset_rows(const mcar_dataset* ds);
MCAR_API size_t mcar_dataset_cols(const mcar_dataset* ds);
MCAR_API size_t mcar_dataset_complete_count(const mcar_dataset* ds);
MCAR_API size_t mcar_dataset_incomplete_count(const mcar_dataset* ds);
MCAR_API size_t mcar_dataset_missing_count(const mcar_dataset* ds, size_t column);

MCAR_API mcar_status mcar_dataset_write_csv(const mcar_dataset* ds, const char* path,
                                            const char* na_token);

/* ---- tests --------------------------------------------------------------- */

/* json_out (optional) receives the full result including diagnostics. */
MCAR_API mcar_status mcar_run_test(const mcar_dataset* ds, mcar_method method, double alpha,
                                   mcar_result* out, char** json_out);

/* ---- synthesis / simulation ---------------------------------------------- */

/* spec_json is a scenario document (distribution, mechanism, p, q, n,
 * master_seed); the dataset is replication 0 of that scenario. resolved_json
 * (optional) receives the scenario with all defaults filled in. */
MCAR_API mcar_status mcar_generate(const char* spec_json, mcar_dataset** out,
                                   char** resolved_json);

/* Runs the scenario (and its optional sweep) and writes the results CSV. */
MCAR_API mcar_status mcar_simulate(const char* scenario_json, unsigned workers,
                                   const char* results_csv_path, mcar_progress_fn progress,
                                   void* user);

/* x_field: "param", "n" or NULL/"auto". */
MCAR_API mcar_status mcar_plot(const char* results_csv_path, const char* svg_path,
                               const char* x_field, double alpha);

#ifdef __cplusplus
}
#endif

#endif
