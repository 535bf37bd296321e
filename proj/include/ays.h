/* C interface to the schedule optimization library.
 *
 * All functions returning int give 0 (AYS_OK) on success and a nonzero error
 * code otherwise; ays_last_error() describes the most recent failure on the
 * calling thread. Objects returned through out-parameters are owned by the
 * caller and released with the matching *_free function.
 */
#ifndef AYS_H
#define AYS_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
  AYS_OK = 0,
  AYS_ERR_INVALID_ARGUMENT = 1,
  AYS_ERR_IO = 2,
  AYS_ERR_PARSE = 3,
  AYS_ERR_RUNTIME = 4
};

typedef struct ays_schedule ays_schedule;
typedef struct ays_model ays_model;
typedef struct ays_opt_result ays_opt_result;

const char* ays_version(void);
const char* ays_last_error(void);
void ays_string_free(char* s);

/* ---- schedules ------------------------------------------------------- */

/* kind: edm | logsnr | time-uniform | time-quadratic | gaussian-optimal |
 * gaussian-klub-optimal. rho is used by edm, c by the gaussian kinds. */
int ays_schedule_create(const char* kind, int steps, double sigma_min,
                        double sigma_max, double rho, double c,
                        ays_schedule** out);
int ays_schedule_from_values(const double* sigmas, int count, const char* name,
                             ays_schedule** out);
int ays_schedule_load(const char* path, ays_schedule** out);
int ays_schedule_save(const ays_schedule* s, const char* path);
int ays_schedule_to_json(const ays_schedule* s, char** json_out);

int ays_schedule_steps(const ays_schedule* s);
int ays_schedule_values(const ays_schedule* s, double* out, int capacity);
int ays_schedule_name(const ays_schedule* s, char** name_out);

int ays_schedule_subdivide(const ays_schedule* s, ays_schedule** out);
int ays_schedule_interpolate(const ays_schedule* s, int steps,
                             ays_schedule** out);
/* empty string when valid, else a description of the first violation */
int ays_schedule_validate(const ays_schedule* s, char** message_out);

void ays_schedule_free(ays_schedule* s);

/* ---- data models ----------------------------------------------------- */

int ays_model_gaussian(double c, int d, ays_model** out);
int ays_model_grid(int rows, int cols, double spacing, double gamma,
                   ays_model** out);
int ays_model_from_json(const char* json, ays_model** out);
int ays_model_load(const char* path, ays_model** out);
int ays_model_to_json(const ays_model* m, char** json_out);

int ays_model_dim(const ays_model* m);
/* 1 if the model is a single isotropic Gaussian, else 0; -1 on null */
int ays_model_is_gaussian(const ays_model* m);
int ays_model_gaussian_c(const ays_model* m, double* c_out);
int ays_model_log_density(const ays_model* m, const double* x, double sigma,
                          double* out);
int ays_model_denoise(const ays_model* m, const double* x, double sigma,
                      double* out);
int ays_model_sample(const ays_model* m, int64_t n, uint64_t seed, double* out);
int ays_model_nll(const ays_model* m, const double* xs, int64_t n, double* nll,
                  double* std_error);
int ays_model_axis_moments(const ays_model* m, double* mean_out,
                           double* std_out);

void ays_model_free(ays_model* m);

/* ---- sampling -------------------------------------------------------- */

/* solver: ddim | stochastic-ddim | er-sde | dpmpp-2m | sde-dpmpp-2m.
 * out must hold n * dim doubles. from_marginal = 1 starts chains from the
 * exact noised data law at sigma_max instead of N(0, sigma_max^2 I).
 * trace_csv_path may be NULL. */
int ays_sampler_run(const ays_model* m, const char* solver, double lambda,
                    const ays_schedule* s, int64_t n, uint64_t seed,
                    int from_marginal, double* out,
                    const char* trace_csv_path);

/* ---- Gaussian closed forms ------------------------------------------- */

int ays_gaussian_euler_kl(const ays_schedule* s, double c, int d, double* f_out,
                          double* kl_out);
int ays_gaussian_euler_output_variance(const ays_schedule* s, double c,
                                       double* out);
int ays_gaussian_klub_closed_form(const ays_schedule* s, double c, double* out);
int ays_gaussian_denoiser_gap(double t, double t_i, double c, double* out);

/* ---- KLUB estimation -------------------------------------------------- */

/* Monte-Carlo estimate of the discretization bound summed over the schedule.
 * n_mc samples per interval, drawn against a pool_size data pool. */
int ays_klub_schedule_total(const ays_model* m, const ays_schedule* s,
                            int64_t n_mc, int64_t pool_size, uint64_t seed,
                            double* value, double* std_error);

/* ---- schedule optimization ------------------------------------------- */

/* ---- files and summaries --------------------------------------------- */

/* atomic write: temp file in the target directory, then rename */
int ays_write_text(const char* path, const char* text);
int ays_write_samples_csv(const char* path, const double* xs, int64_t n, int d);
int ays_write_samples_f64(const char* path, const double* xs, int64_t n, int d);
/* readers allocate *xs_out; release with ays_buffer_free */
int ays_read_samples_csv(const char* path, double** xs_out, int64_t* n_out,
                         int* d_out);
int ays_read_samples_f64(const char* path, int d, double** xs_out,
                         int64_t* n_out);
void ays_buffer_free(double* p);

/* 16-hex-digit FNV-1a digest of the file bytes */
int ays_file_digest(const char* path, char** hex_out);

/* counts of n 2-d points on a bins x bins grid over
 * [box[0], box[1]] x [box[2], box[3]]; points outside are clamped into the
 * edge bins, so the counts sum to n. counts is row-major, bins*bins long. */
int ays_histogram2d(const double* xs, int64_t n, const double* box, int bins,
                    int64_t* counts);

typedef struct ays_opt_options {
  int n_candidates;        /* default 11 */
  double span;             /* default 0.9 */
  int64_t n_mc;            /* default 4096 */
  int64_t pool_size;       /* default 8192 */
  int stage1_max_sweeps;   /* default 30 */
  int refine_max_sweeps;   /* default 5 */
  int early_stop_cadence;  /* default 1 */
  int64_t monitor_samples; /* default 20000 */
  const char* monitor_solver; /* default "sde-dpmpp-2m" */
  double monitor_lambda;   /* default 1.0 */
  const char* init_kind;   /* default "edm" */
  double init_rho;         /* default 7.0 */
  double sigma_min;        /* default 0.002 */
  double sigma_max;        /* default 80.0 */
  uint64_t seed;
} ays_opt_options;

void ays_opt_options_defaults(ays_opt_options* opts);

int ays_optimize(const ays_model* m, const ays_opt_options* opts,
                 ays_opt_result** out);
/* steps 10, 20, 40 return the stage outputs; other values interpolate the
 * 40-step schedule */
int ays_opt_result_schedule(const ays_opt_result* r, int steps,
                            ays_schedule** out);
int ays_opt_result_report_json(const ays_opt_result* r, char** json_out);
void ays_opt_result_free(ays_opt_result* r);

#ifdef __cplusplus
}
#endif

#endif /* AYS_H */
