/* C interface to the mdce library.
 *
 * All functions return an mdce_status; on failure the message is available
 * from mdce_last_error() on the calling thread until the next call.
 * Strings returned through char** are owned by the caller and released with
 * mdce_string_free(). Handles are released with their *_free function;
 * passing NULL to a free function is a no-op.
 */
#ifndef MDCE_H
#define MDCE_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(MDCE_BUILDING)
#    define MDCE_API __declspec(dllexport)
#  else
#    define MDCE_API __declspec(dllimport)
#  endif
#else
#  define MDCE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mdce_status {
  MDCE_OK = 0,
  MDCE_ERR_INVALID_ARGUMENT = 1,
  MDCE_ERR_OUT_OF_RANGE = 2,
  MDCE_ERR_DIMENSION_MISMATCH = 3,
  MDCE_ERR_SINGULAR = 4,
  MDCE_ERR_DEGENERATE_INTERMEDIATE = 5,
  MDCE_ERR_TRUNCATION = 6,
  MDCE_ERR_NOT_CONVERGED = 7,
  MDCE_ERR_SEARCH_FAILED = 8,
  MDCE_ERR_INTEGRATION_QUALITY = 9,
  MDCE_ERR_NOT_STEADY = 10,
  MDCE_ERR_IO = 11,
  MDCE_ERR_CONFIG = 12,
  MDCE_ERR_NULL_ARGUMENT = 98,
  MDCE_ERR_INTERNAL = 99
} mdce_status;

MDCE_API const char* mdce_version(void);
MDCE_API const char* mdce_status_name(mdce_status status);
MDCE_API const char* mdce_last_error(void);
MDCE_API void mdce_string_free(char* s);

/* ------------------------------------------------------------ model */

typedef struct mdce_params {
  double omega_c, omega_m, omega_a;
  double lambda, g;
  double kappa, eta, gamma;
} mdce_params;

/* omega_c = 1, omega_m = 0.3, omega_a = 0.7, lambda = 0.01, g = 0.03, no loss */
MDCE_API void mdce_params_default(mdce_params* out);

/* qubit: 0 = g, 1 = e. Index = (qubit * n_cav + n) * n_mech + m. */
MDCE_API mdce_status mdce_basis_index(int qubit, int n, int m, int n_cav, int n_mech,
                                      int* out);

/* ------------------------------------------------------------ perturbation */

/* Closed-form effective coupling of |e,n,m+1> <-> |g,n+1,m>. */
MDCE_API mdce_status mdce_g_eff(const mdce_params* p, int n, int m, double* out);

/* Brute-force second-order element at p->omega_a over an (n_cav, n_mech)
 * truncation; *paths receives the number of contributing intermediates. */
MDCE_API mdce_status mdce_g_eff_generic(const mdce_params* p, int n, int m, int n_cav,
                                        int n_mech, double* out, int* paths);

typedef struct mdce_shifts {
  double eps1, eps2, delta, delta_closed;
} mdce_shifts;

MDCE_API mdce_status mdce_energy_shifts(const mdce_params* p, int n, int m, mdce_shifts* out);
MDCE_API mdce_status mdce_resonant_omega_a(const mdce_params* p, int n, int m, double* out);

/* ------------------------------------------------------------ spectrum */

/* Writes the min(capacity, dimension) lowest eigenvalues of H; *count gets
 * the full dimension. */
MDCE_API mdce_status mdce_eigenvalues(const mdce_params* p, int n_cav, int n_mech,
                                      double* out, size_t capacity, size_t* count);

typedef struct mdce_crossing {
  double omega_a_star, gap, predicted_gap, offset, predicted_delta;
} mdce_crossing;

/* half_width <= 0 selects the automatic search window. */
MDCE_API mdce_status mdce_find_crossing(const mdce_params* p, int n, int m, int n_cav,
                                        int n_mech, double half_width, mdce_crossing* out);

/* ------------------------------------------------------------ analysis */

typedef struct mdce_spectrum mdce_spectrum;

MDCE_API mdce_status mdce_fourier_spectrum(const double* series, size_t len, double dt_sample,
                                           mdce_spectrum** out);
MDCE_API size_t mdce_spectrum_size(const mdce_spectrum* s);
MDCE_API double mdce_spectrum_bin_width(const mdce_spectrum* s);
MDCE_API mdce_status mdce_spectrum_data(const mdce_spectrum* s, const double** freqs,
                                        const double** magnitude);
/* Peak frequencies, strongest first; writes at most capacity entries. */
MDCE_API mdce_status mdce_spectrum_peaks(const mdce_spectrum* s, double factor, double* freqs,
                                         size_t capacity, size_t* count);
MDCE_API void mdce_spectrum_free(mdce_spectrum* s);

typedef struct mdce_steady {
  double value, t_start, t_end, drift;
  int steady;
} mdce_steady;

MDCE_API mdce_status mdce_steady_state(const double* times, const double* values, size_t len,
                                       double window_fraction, mdce_steady* out);
MDCE_API mdce_status mdce_photon_flux_hz(double n_ss, double linewidth_hz, double* out);

/* ------------------------------------------------------------ configs and runs */

typedef struct mdce_config mdce_config;

MDCE_API size_t mdce_preset_count(void);
MDCE_API const char* mdce_preset_name(size_t index);

MDCE_API mdce_status mdce_config_default(mdce_config** out);
MDCE_API mdce_status mdce_config_preset(const char* name, mdce_config** out);
MDCE_API mdce_status mdce_config_load(const char* path, mdce_config** out);
MDCE_API mdce_status mdce_config_from_json(const char* text, mdce_config** out);
MDCE_API mdce_status mdce_config_to_json(const mdce_config* cfg, char** out);
/* Sets a dotted field, e.g. ("params.omega_m", "0.1") or ("experiment", "fft").
 * The value is parsed as JSON; text that is not valid JSON is taken as a string. */
MDCE_API mdce_status mdce_config_set(mdce_config* cfg, const char* key, const char* value);
MDCE_API mdce_status mdce_config_validate(const mdce_config* cfg);
MDCE_API void mdce_config_free(mdce_config* cfg);

typedef void (*mdce_log_fn)(const char* message, void* user);

typedef struct mdce_run_options {
  const char* output_dir; /* NULL: "out" */
  int verify;
  int jobs;        /* <= 0: hardware concurrency */
  int write_files; /* 0 keeps everything in memory */
  mdce_log_fn log; /* may be NULL */
  void* user;
} mdce_run_options;

MDCE_API void mdce_run_options_default(mdce_run_options* out);

typedef struct mdce_result mdce_result;

MDCE_API mdce_status mdce_run(const mdce_config* cfg, const mdce_run_options* options,
                              mdce_result** out);
MDCE_API mdce_status mdce_result_summary_json(const mdce_result* r, char** out);
MDCE_API mdce_status mdce_result_manifest_json(const mdce_result* r, char** out);
/* 1 when every convergence check passed (or none ran). */
MDCE_API int mdce_result_checks_passed(const mdce_result* r);
MDCE_API void mdce_result_free(mdce_result* r);

/* ------------------------------------------------------------ trajectories */

typedef struct mdce_trajectory mdce_trajectory;

/* Integrates the trajectory described by cfg (drive, initial state,
 * integration settings) without writing files. */
MDCE_API mdce_status mdce_evolve(const mdce_config* cfg, mdce_trajectory** out);
MDCE_API size_t mdce_trajectory_size(const mdce_trajectory* t);
/* name: "t", "n_qubit", "n_cav", "n_mech", "trace_err" or "energy". */
MDCE_API mdce_status mdce_trajectory_column(const mdce_trajectory* t, const char* name,
                                            const double** data, size_t* len);
MDCE_API double mdce_trajectory_max_hermiticity_error(const mdce_trajectory* t);
MDCE_API void mdce_trajectory_free(mdce_trajectory* t);

#ifdef __cplusplus
}
#endif

#endif /* MDCE_H */
