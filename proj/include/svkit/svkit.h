/* C interface to the subunit-vector verification toolkit.
 *
 * Objects are opaque handles owned by the caller and released with the matching *_free function.
 * Every call returns an svk_status; on failure svk_last_error() describes the problem (per thread).
 * Field indices are zero-based. Matrices are dense row-major arrays. */
#ifndef SVKIT_SVKIT_H
#define SVKIT_SVKIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SVK_API __declspec(dllexport)
#else
#define SVK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum svk_status {
  SVK_OK = 0,
  SVK_E_INVALID_ARGUMENT = 1,
  SVK_E_OUT_OF_DOMAIN = 2,
  SVK_E_INDEX_OUT_OF_RANGE = 3,
  SVK_E_NOT_SYMMETRIC = 4,
  SVK_E_SINGULAR = 5,
  SVK_E_UNSUPPORTED = 6,
  SVK_E_PARSE = 7,
  SVK_E_IO = 8,
  SVK_E_PRECONDITION = 9,
  SVK_E_NUMERICAL = 10,
  SVK_E_NULL_POINTER = 11,
  SVK_E_BUFFER_TOO_SMALL = 12,
  SVK_E_INTERNAL = 99
} svk_status;

typedef enum svk_subunit_mode { SVK_SUBUNIT_PLUS = 0, SVK_SUBUNIT_MINUS = 1, SVK_SUBUNIT_STRONG = 2 } svk_subunit_mode;
typedef enum svk_verdict { SVK_CERTIFIED = 0, SVK_REFUTED = 1, SVK_INCONCLUSIVE = 2 } svk_verdict;

typedef struct svk_family svk_family;
typedef struct svk_operator svk_operator;
typedef struct svk_grid svk_grid;

SVK_API const char* svk_version(void);
/* Message of the last failed call on this thread ("" when none). */
SVK_API const char* svk_last_error(void);
/* Short name of a status code. */
SVK_API const char* svk_status_name(svk_status status);

/* Families */
SVK_API svk_status svk_family_catalog(const char* name, svk_family** out);
SVK_API svk_status svk_family_from_json(const char* json_text, svk_family** out);
SVK_API svk_status svk_family_load(const char* path, svk_family** out);
SVK_API void svk_family_free(svk_family* family);
SVK_API svk_status svk_family_dims(const svk_family* family, int* dim, int* count);
SVK_API svk_status svk_family_set_domain(svk_family* family, const double* lo, const double* hi);
SVK_API svk_status svk_field_eval(const svk_family* family, int i, const double* x, double* out);
/* out: d*d row-major */
SVK_API svk_status svk_field_jacobian(const svk_family* family, int i, const double* x, double* out);
SVK_API svk_status svk_lie_bracket(const svk_family* family, int i, int j, const double* x, double* out);
SVK_API svk_status svk_hormander_rank(const svk_family* family, const double* x, int max_depth, double tol, int* rank);
/* q_out: m values; H_out: m*m row-major */
SVK_API svk_status svk_horizontal_jet(const svk_family* family, const double* x, const double* p, const double* X,
                                      double* q_out, double* H_out);

/* Operators (descriptor is a structured-text object, see the README) */
SVK_API svk_status svk_operator_from_json(const svk_family* family, const char* descriptor, svk_operator** out);
SVK_API void svk_operator_free(svk_operator* op);
/* grad_dim receives the size of p (the square X is grad_dim x grad_dim). */
SVK_API svk_status svk_operator_dims(const svk_operator* op, int* dim, int* grad_dim);
SVK_API svk_status svk_operator_eval(const svk_operator* op, const double* x, double r, const double* p,
                                     const double* X, double* out);
/* sign: +1 for M+, -1 for M- */
SVK_API svk_status svk_pucci(const double* M, int n, double lambda, double Lambda, int sign, double* out);
SVK_API svk_status svk_certify_subunit(const svk_operator* op, const double* x, const double* Z, svk_subunit_mode mode,
                                       svk_verdict* verdict);

/* Control system: n_segments constant controls betas[k*m..] held for durations[k]. */
SVK_API svk_status svk_integrate(const svk_family* family, const double* x0, int n_segments, const double* betas,
                                 const double* durations, double T, double dt, double* y_end, int* exited);
SVK_API svk_status svk_btc_connect(const svk_family* family, const double* x0, const double* x1, const double* lo,
                                   const double* hi, const int* resolution, double T_max, double tol, int* success,
                                   double* s, double* final_error);

/* Grid functions */
SVK_API svk_status svk_grid_load(const char* path, svk_grid** out);
SVK_API void svk_grid_free(svk_grid* grid);
SVK_API svk_status svk_grid_info(const svk_grid* grid, int* dims, long* nodes);
SVK_API svk_status svk_grid_interpolate(const svk_grid* grid, const double* x, double* out);
SVK_API svk_status svk_check_subsolution(const svk_operator* op, const svk_grid* grid, int* refuted, double* max_value);

/* Scenarios. format may be NULL (config decides); seed may be NULL (config decides).
 * exit_code: 0 all pass, 1 any refutation or failure, 2 input or config error. */
SVK_API svk_status svk_run_scenario(const char* config_path, const char* out_dir, const char* format,
                                    const uint64_t* seed, int* exit_code);

/* Newline-separated listing of built-in families, operator kinds and task names. Writes at most cap bytes
 * (including the terminator); *needed receives the full size. */
SVK_API svk_status svk_catalog(char* buf, size_t cap, size_t* needed);

#ifdef __cplusplus
}
#endif

#endif
