#ifndef DYNREGRET_H
#define DYNREGRET_H

/* C interface to the dynamic-regret experiment library.
 *
 * Handles are opaque and owned by the caller; release each with its _free
 * function. Every fallible call returns a dr_status and leaves a message for
 * dr_last_error() on the calling thread. Strings returned through char**
 * outputs are released with dr_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(DYNREGRET_BUILDING_LIBRARY)
#    define DR_API __declspec(dllexport)
#  else
#    define DR_API __declspec(dllimport)
#  endif
#else
#  define DR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dr_status {
  DR_OK = 0,
  DR_ERR_DIMENSION_MISMATCH = 1,
  DR_ERR_NOT_POSITIVE_DEFINITE = 2,
  DR_ERR_NOT_SYMMETRIC = 3,
  DR_ERR_NEGATIVE_QUADRATIC_FORM = 4,
  DR_ERR_INVALID_CONSTANTS = 5,
  DR_ERR_ZETA_TOO_SMALL = 6,
  DR_ERR_NO_CONVERGENCE = 7,
  DR_ERR_DIVERGED = 8,
  DR_ERR_NOT_ADMISSIBLE = 9,
  DR_ERR_RHO_OUT_OF_RANGE = 10,
  DR_ERR_EMPTY_HULL = 11,
  DR_ERR_CONFIG_INVALID = 12,
  DR_ERR_UNSUPPORTED_ENVIRONMENT = 13,
  DR_ERR_IO = 14,
  DR_ERR_PARSE = 15,
  DR_ERR_PROTOCOL_VIOLATION = 16,
  DR_ERR_INVARIANT_VIOLATED = 17,
  DR_ERR_NON_FINITE = 18,
  DR_ERR_INVALID_ARGUMENT = 100,
  DR_ERR_INTERNAL = 101
} dr_status;

typedef struct dr_experiment dr_experiment;
typedef struct dr_summary dr_summary;
typedef struct dr_sequence dr_sequence;

enum { DR_WRITE_CSV = 1u, DR_WRITE_JSON = 2u };

typedef struct dr_run_info {
  const char* learner; /* valid while the summary lives */
  const char* algorithm;
  uint64_t seed;
  int oracle;
  size_t horizon;
  double cumulative_regret;
  long long gradient_queries;
  size_t bound_count;
} dr_run_info;

typedef struct dr_bound_info {
  const char* theorem;
  int admissible;
  int passed;
  double bound; /* NaN when not admissible */
  double measured;
  double slack; /* NaN when not admissible */
  const char* reason; /* empty when admissible */
} dr_bound_info;

DR_API const char* dr_version(void);
DR_API const char* dr_status_name(dr_status status);
DR_API const char* dr_last_error(void);
DR_API void dr_string_free(char* s);

/* experiments */
DR_API dr_status dr_experiment_load(const char* path, dr_experiment** out);
/* format is "json" or "toml"; base_dir resolves relative paths (may be NULL) */
DR_API dr_status dr_experiment_parse(const char* text, const char* format, const char* base_dir,
                                     dr_experiment** out);
DR_API void dr_experiment_free(dr_experiment* exp);
DR_API dr_status dr_experiment_set_seed(dr_experiment* exp, uint64_t seed);
DR_API dr_status dr_experiment_set_horizon(dr_experiment* exp, size_t horizon);
/* threads = 0 uses the hardware concurrency */
DR_API dr_status dr_experiment_run(const dr_experiment* exp, unsigned threads, dr_summary** out);
/* format is "csv" or "json" */
DR_API dr_status dr_compare_regularities(const dr_experiment* exp, const char* format, char** out);

/* summaries */
DR_API void dr_summary_free(dr_summary* summary);
DR_API size_t dr_summary_run_count(const dr_summary* summary);
DR_API dr_status dr_summary_run_info(const dr_summary* summary, size_t run, dr_run_info* out);
DR_API dr_status dr_summary_bound_info(const dr_summary* summary, size_t run, size_t bound,
                                       dr_bound_info* out);
DR_API size_t dr_summary_failed_bounds(const dr_summary* summary);
DR_API dr_status dr_summary_write(const dr_summary* summary, const dr_experiment* exp,
                                  const char* out_dir, unsigned flags);
DR_API dr_status dr_summary_to_json(const dr_summary* summary, char** out);
DR_API dr_status dr_summary_text(const dr_summary* summary, char** out);
DR_API dr_status dr_run_csv(const dr_summary* summary, size_t run, char** out);

/* loss sequences */
DR_API dr_status dr_sequence_generate(const char* spec_path, dr_sequence** out);
DR_API dr_status dr_sequence_load(const char* path, dr_sequence** out);
DR_API dr_status dr_sequence_save(const dr_sequence* seq, const char* path);
DR_API void dr_sequence_free(dr_sequence* seq);
DR_API size_t dr_sequence_horizon(const dr_sequence* seq);
DR_API size_t dr_sequence_dimension(const dr_sequence* seq);
/* writes x*_t (t is 1-based) into out[0..n) */
DR_API dr_status dr_sequence_minimizer(const dr_sequence* seq, size_t t, double* out, size_t n);
DR_API dr_status dr_sequence_value(const dr_sequence* seq, size_t t, const double* x, size_t n,
                                   double* out);

#ifdef __cplusplus
}
#endif

#endif /* DYNREGRET_H */
