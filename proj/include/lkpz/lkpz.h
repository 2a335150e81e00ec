#ifndef LKPZ_H
#define LKPZ_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Pseudo-spectral simulator for u_t = -Lu + lambda |grad u|^q on a
 * periodic box, with L given by its radial Fourier symbol.  All entry
 * points return a status; on failure lkpz_last_error() describes the
 * problem for the calling thread. */

typedef enum lkpz_status {
  LKPZ_OK = 0,
  LKPZ_INVALID_ARGUMENT,
  LKPZ_BAD_CONFIG,
  LKPZ_RESOLUTION,
  LKPZ_OUT_OF_RANGE,
  LKPZ_BLOW_UP,
  LKPZ_STEP_CONTROL,
  LKPZ_NO_CONVERGENCE,
  LKPZ_HORIZON_TOO_LARGE,
  LKPZ_IO,
  LKPZ_INTERNAL
} lkpz_status;

typedef struct lkpz_config lkpz_config;
typedef struct lkpz_result lkpz_result;
typedef struct lkpz_symbol lkpz_symbol;
typedef struct lkpz_field lkpz_field;

const char* lkpz_version(void);
const char* lkpz_last_error(void);

/* --- configs ------------------------------------------------------- */

/* Parsing always yields a config handle; collected violations are
 * queryable and make lkpz_execute refuse to run. */
lkpz_status lkpz_config_parse_file(const char* path, lkpz_config** out);
lkpz_status lkpz_config_parse_text(const char* text, lkpz_config** out);
size_t lkpz_config_issue_count(const lkpz_config* cfg);
/* newline-separated issue list with line numbers; owned by the config */
const char* lkpz_config_issues(const lkpz_config* cfg);
const char* lkpz_config_preset(const lkpz_config* cfg);
lkpz_status lkpz_config_set_output_dir(lkpz_config* cfg, const char* dir);
void lkpz_config_free(lkpz_config* cfg);

/* --- experiments ---------------------------------------------------- */

/* Runs the configured preset, writing CSV outputs and report.txt under
 * the config's output directory. */
lkpz_status lkpz_execute(const lkpz_config* cfg, lkpz_result** out);
/* 0 all checks pass, 1 some check failed, 3 solver failure */
int lkpz_result_exit_code(const lkpz_result* res);
size_t lkpz_result_check_count(const lkpz_result* res);
const char* lkpz_result_check_name(const lkpz_result* res, size_t i);
const char* lkpz_result_check_status(const lkpz_result* res, size_t i);
const char* lkpz_result_check_detail(const lkpz_result* res, size_t i);
/* named scalar from the run summary; NaN when the key is missing */
double lkpz_result_metric(const lkpz_result* res, const char* key);
void lkpz_result_free(lkpz_result* res);

/* --- symbols -------------------------------------------------------- */

lkpz_status lkpz_symbol_fractional(double alpha, double ell,
                                   lkpz_symbol** out);
lkpz_status lkpz_symbol_multifractional(const double* coeffs,
                                        const double* exponents, size_t count,
                                        lkpz_symbol** out);
lkpz_status lkpz_symbol_tabulated(double alpha, double ell, const double* xi,
                                  const double* values, size_t count,
                                  lkpz_symbol** out);
lkpz_status lkpz_symbol_eval(const lkpz_symbol* sym, const double* xi, int dim,
                             double* out);
void lkpz_symbol_free(lkpz_symbol* sym);

/* --- fields and kernels ---------------------------------------------- */

/* alpha-stable kernel p_alpha(., t) sampled on the n^dim grid over
 * [-box, box)^dim; unit mass. */
lkpz_status lkpz_kernel(double alpha, double t, int dim, int n, double box,
                        lkpz_field** out);
lkpz_status lkpz_field_read(const char* path, lkpz_field** out);
lkpz_status lkpz_field_write(const lkpz_field* f, const char* path);
int lkpz_field_dim(const lkpz_field* f);
int lkpz_field_n(const lkpz_field* f);
double lkpz_field_box(const lkpz_field* f);
/* row-major samples, n^dim doubles, owned by the field */
const double* lkpz_field_data(const lkpz_field* f);
size_t lkpz_field_size(const lkpz_field* f);
/* grid coordinate along one axis: -box + j * (2 box / n) */
double lkpz_field_coord(const lkpz_field* f, int j);
void lkpz_field_free(lkpz_field* f);

#ifdef __cplusplus
}
#endif

#endif /* LKPZ_H */
