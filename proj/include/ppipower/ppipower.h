/*
   Copyright 2026 The ppipower Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

/*
 * ppipower C interface.
 *
 * Every fallible call returns a ppw_status; on failure a message describing
 * the problem is available from ppw_last_error() on the calling thread until
 * the next failing call on that thread. Handles are opaque and owned by the
 * caller, who releases them with the matching *_destroy function (which
 * accepts NULL).
 *
 * An infinite unlabeled pool is passed as INFINITY.
 */
#ifndef PPIPOWER_H
#define PPIPOWER_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PPW_BUILDING_LIBRARY)
#    define PPW_API __declspec(dllexport)
#  else
#    define PPW_API __declspec(dllimport)
#  endif
#else
#  define PPW_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ppw_status {
    PPW_OK = 0,
    PPW_ERR_DOMAIN = 1,
    PPW_ERR_INVALID_ARGUMENT = 2,
    PPW_ERR_DEGENERATE = 3,
    PPW_ERR_UNATTAINABLE = 4,
    PPW_ERR_INFEASIBLE = 5,
    PPW_ERR_SINGULAR = 6,
    PPW_ERR_CONFIG = 7,
    PPW_ERR_PARSE = 8,
    PPW_ERR_INTERNAL = 9
} ppw_status;

typedef enum ppw_warning {
    PPW_WARN_NONE = 0,
    PPW_WARN_ZERO_PREDICTION_VARIANCE = 1
} ppw_warning;

typedef enum ppw_measure {
    PPW_RELATIVE_RISK = 0,
    PPW_ODDS_RATIO = 1
} ppw_measure;

typedef struct ppw_design {
    double alpha;        /* two-sided level, (0, 1) */
    double target_power; /* (alpha/2, 1) */
    double delta;        /* effect size under the alternative */
} ppw_design;

typedef struct ppw_moments {
    double var_y;
    double var_f;
    double cov_yf;
    int conservative; /* nonzero when derived from an MSE bound */
} ppw_moments;

typedef struct ppw_binary_metrics {
    double prevalence;
    double sensitivity;
    double specificity;
} ppw_binary_metrics;

typedef struct ppw_two_by_two {
    double p0;    /* control event probability */
    double p1;    /* treatment event probability */
    double rho0;  /* Corr(Y, f) in the control arm */
    double rho1;  /* Corr(Y, f) in the treatment arm */
    double kappa; /* n1 / n0 */
    ppw_measure measure;
} ppw_two_by_two;

typedef struct ppw_blocks {
    double v_yy;
    double v_ff;
    double v_yf;
} ppw_blocks;

/* Optional integers are -1 and optional reals NaN when absent. */
typedef struct ppw_plan {
    int64_t n_star;
    int64_t n_star_other;
    double n_exact;
    double analytic_power;
    double variance;
    double lambda_star;
    double lambda_star_other;
    int64_t classical_n;
    int64_t classical_n_other;
    double reduction;
    int pool_exhausted;
    ppw_warning warning;
} ppw_plan;

PPW_API const char* ppw_version(void);
PPW_API const char* ppw_status_name(ppw_status status);
PPW_API const char* ppw_last_error(void);
/* Smallest feasible unlabeled pool after PPW_ERR_INFEASIBLE, otherwise NaN. */
PPW_API double ppw_last_error_minimal_unlabeled(void);

PPW_API ppw_status ppw_normal_cdf(double z, double* out);
PPW_API ppw_status ppw_normal_quantile(double q, double* out);
PPW_API ppw_status ppw_variance_threshold(const ppw_design* d, double* out);

/* Calibration */
PPW_API ppw_status ppw_calibrate_binary(const ppw_binary_metrics* m, ppw_moments* out);
PPW_API ppw_status ppw_calibrate_r2(double var_y, double r2, ppw_moments* out);
PPW_API ppw_status ppw_calibrate_mse(double var_y, double mse, ppw_moments* out);
PPW_API double ppw_moments_rho(const ppw_moments* m);

typedef struct ppw_pilot ppw_pilot;

/* Parses `y,f` or `y,f,group` CSV text with a header row. */
PPW_API ppw_status ppw_pilot_parse_csv(const char* text, size_t len, ppw_pilot** out);
PPW_API void ppw_pilot_destroy(ppw_pilot* pilot);
PPW_API size_t ppw_pilot_size(const ppw_pilot* pilot);
/* `group` may be NULL for all rows. */
PPW_API ppw_status ppw_pilot_moments(const ppw_pilot* pilot, const char* group, ppw_moments* out);
/* clamp != 0 restricts the estimate to [0, 1]. */
PPW_API ppw_status ppw_pilot_lambda(const ppw_pilot* pilot, const char* group, double r, int clamp,
                                    double* lambda, ppw_warning* warning);

/* Variance engine */
PPW_API ppw_status ppw_ppi_pp_variance(const ppw_moments* m, double n, double N, double lambda,
                                       double* out);
PPW_API ppw_status ppw_ppi_variance(const ppw_moments* m, double n, double N, double* out);
PPW_API ppw_status ppw_lambda_star(const ppw_moments* m, double n, double N, double* lambda,
                                   ppw_warning* warning);
PPW_API ppw_status ppw_optimal_variance(const ppw_moments* m, double n, double N, double* out);

/* Power and sample size. Power functions accept real-valued n for curves. */
PPW_API ppw_status ppw_power_classical(double n, double var_y, const ppw_design* d, double* out);
PPW_API ppw_status ppw_n_classical(double var_y, const ppw_design* d, int64_t* out);

PPW_API ppw_status ppw_power_mean(const ppw_moments* m, double n, double N, const ppw_design* d,
                                  double* out);
PPW_API ppw_status ppw_n_mean(const ppw_moments* m, double N, const ppw_design* d, ppw_plan* out);

PPW_API ppw_status ppw_power_mean_vanilla(const ppw_moments* m, double n, double N,
                                          const ppw_design* d, double* out);
PPW_API ppw_status ppw_n_mean_vanilla(const ppw_moments* m, double N, const ppw_design* d,
                                      ppw_plan* out);

/* kappa = n_B / n_A; n is the group-A count. */
PPW_API ppw_status ppw_power_two_sample(const ppw_moments* a, const ppw_moments* b, double n,
                                        double N_a, double N_b, double kappa, const ppw_design* d,
                                        double* out);
PPW_API ppw_status ppw_n_two_sample(const ppw_moments* a, const ppw_moments* b, double N_a,
                                    double N_b, double kappa, const ppw_design* d, ppw_plan* out);

/* `diff` holds the moments of the within-pair differences (D, G). */
PPW_API ppw_status ppw_power_paired(const ppw_moments* diff, double n, double N,
                                    const ppw_design* d, double* out);
PPW_API ppw_status ppw_n_paired(const ppw_moments* diff, double N, const ppw_design* d,
                                ppw_plan* out);

/* The effect is the log relative risk or log odds ratio implied by (p0, p1);
   d->delta is ignored. */
PPW_API ppw_status ppw_power_two_by_two(const ppw_two_by_two* t, double n0, double alpha,
                                        double* out);
PPW_API ppw_status ppw_n_two_by_two(const ppw_two_by_two* t, const ppw_design* d, ppw_plan* out);

PPW_API ppw_status ppw_power_regression(const ppw_blocks* c, double n, double N,
                                        const ppw_design* d, double* out);
PPW_API ppw_status ppw_n_regression(const ppw_blocks* c, double N, const ppw_design* d,
                                    ppw_plan* out);

PPW_API double ppw_rule_of_thumb(double rho2);

/* Simulation */
typedef struct ppw_sim_config ppw_sim_config;
typedef struct ppw_sim_result ppw_sim_result;

typedef struct ppw_sim_row {
    const char* design;      /* static string */
    const char* lambda_mode; /* static string */
    int n;
    int N;
    int n_other; /* -1 for one-group designs */
    int N_other;
    double rho_or_accuracy;
    double effect;
    double analytic_power;
    double empirical_power;
    double abs_discrepancy;
    double type1; /* NaN unless null runs were requested */
    double lambda_rmse;
    double mc_stderr;
    int n_dropped;
    double target_power; /* NaN outside planned-n experiments */
    double rho_plan;     /* NaN outside misspecification runs */
    int pool_exhausted;
} ppw_sim_row;

PPW_API ppw_status ppw_sim_config_parse(const char* text, size_t len, ppw_sim_config** out);
PPW_API ppw_status ppw_sim_config_load(const char* path, ppw_sim_config** out);
PPW_API void ppw_sim_config_destroy(ppw_sim_config* cfg);
PPW_API ppw_status ppw_sim_config_set_seed(ppw_sim_config* cfg, uint64_t seed);
PPW_API ppw_status ppw_sim_config_set_threads(ppw_sim_config* cfg, int threads);
PPW_API ppw_status ppw_sim_config_set_replicates(ppw_sim_config* cfg, int replicates);

PPW_API ppw_status ppw_simulate(const ppw_sim_config* cfg, ppw_sim_result** out);
PPW_API void ppw_sim_result_destroy(ppw_sim_result* res);
PPW_API size_t ppw_sim_result_rows(const ppw_sim_result* res);
PPW_API ppw_status ppw_sim_result_row(const ppw_sim_result* res, size_t index, ppw_sim_row* out);
/* Copies the CSV rendering into buf (NUL-terminated) when cap is large
   enough; *needed always receives the size including the terminator. */
PPW_API ppw_status ppw_sim_result_csv(const ppw_sim_result* res, char* buf, size_t cap,
                                      size_t* needed);

#ifdef __cplusplus
}
#endif

#endif /* PPIPOWER_H */
