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

#include "ppipower/ppipower.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <new>
#include <string>

#include "ppipower/calibration.hpp"
#include "ppipower/design.hpp"
#include "ppipower/error.hpp"
#include "ppipower/normal.hpp"
#include "ppipower/power.hpp"
#include "ppipower/sim/config.hpp"
#include "ppipower/sim/experiment.hpp"
#include "ppipower/variance.hpp"

struct ppw_pilot {
    ppipower::PilotSample sample;
};

struct ppw_sim_config {
    ppipower::sim::SimConfig config;
};

struct ppw_sim_result {
    ppipower::sim::SimResult result;
    std::string csv;
};

namespace {

using namespace ppipower;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

thread_local std::string g_last_error;
thread_local double g_minimal_unlabeled = kNaN;

ppw_status to_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::domain: return PPW_ERR_DOMAIN;
        case ErrorCode::invalid_argument: return PPW_ERR_INVALID_ARGUMENT;
        case ErrorCode::degenerate: return PPW_ERR_DEGENERATE;
        case ErrorCode::unattainable: return PPW_ERR_UNATTAINABLE;
        case ErrorCode::infeasible: return PPW_ERR_INFEASIBLE;
        case ErrorCode::singular: return PPW_ERR_SINGULAR;
        case ErrorCode::config: return PPW_ERR_CONFIG;
        case ErrorCode::parse: return PPW_ERR_PARSE;
    }
    return PPW_ERR_INTERNAL;
}

ppw_status fail(ppw_status status, const char* message) {
    g_last_error = message;
    g_minimal_unlabeled = kNaN;
    return status;
}

// Runs `body`, translating exceptions into status codes. Nothing thrown
// inside the library crosses the C boundary.
template <typename F>
ppw_status guarded(F&& body) {
    try {
        body();
        return PPW_OK;
    } catch (const Error& e) {
        const ppw_status s = fail(to_status(e.code()), e.what());
        g_minimal_unlabeled = e.minimal_unlabeled().value_or(kNaN);
        return s;
    } catch (const std::bad_alloc&) {
        return fail(PPW_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(PPW_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(PPW_ERR_INTERNAL, "unknown error");
    }
}

#define PPW_REQUIRE(ptr)                                                           \
    do {                                                                           \
        if ((ptr) == nullptr) return fail(PPW_ERR_INVALID_ARGUMENT, #ptr " is NULL"); \
    } while (0)

MomentSet from_c(const ppw_moments& m) {
    return MomentSet::from_covariance(m.var_y, m.var_f, m.cov_yf, m.conservative != 0);
}

ppw_moments to_c(const MomentSet& m) {
    return {m.var_y, m.var_f, m.cov_yf, m.conservative ? 1 : 0};
}

DesignInputs from_c(const ppw_design& d) {
    DesignInputs out;
    out.alpha = d.alpha;
    out.target_power = d.target_power;
    out.delta = d.delta;
    out.validate();
    return out;
}

TwoByTwoSpec from_c(const ppw_two_by_two& t) {
    TwoByTwoSpec s;
    s.p0 = t.p0;
    s.p1 = t.p1;
    s.rho0 = t.rho0;
    s.rho1 = t.rho1;
    s.kappa = t.kappa;
    s.measure = t.measure == PPW_ODDS_RATIO ? RiskMeasure::odds_ratio : RiskMeasure::relative_risk;
    return s;
}

ContrastBlocks from_c(const ppw_blocks& c) { return {c.v_yy, c.v_ff, c.v_yf}; }

ppw_warning to_c(Warning w) {
    return w == Warning::zero_prediction_variance ? PPW_WARN_ZERO_PREDICTION_VARIANCE : PPW_WARN_NONE;
}

ppw_plan to_c(const PlanResult& r) {
    ppw_plan p;
    p.n_star = r.n_star;
    p.n_star_other = r.n_star_other.value_or(-1);
    p.n_exact = r.n_exact;
    p.analytic_power = r.analytic_power;
    p.variance = r.variance;
    p.lambda_star = r.lambda_star.value_or(kNaN);
    p.lambda_star_other = r.lambda_star_other.value_or(kNaN);
    p.classical_n = r.classical_n;
    p.classical_n_other = r.classical_n_other.value_or(-1);
    p.reduction = r.reduction;
    p.pool_exhausted = r.pool_exhausted ? 1 : 0;
    p.warning = to_c(r.warning);
    return p;
}

SampleBudget budget(double n, double N) {
    SampleBudget b{n, N, 1.0};
    b.validate();
    return b;
}

const PilotSample& pilot_view(const ppw_pilot* pilot, const char* group, PilotSample& scratch) {
    if (group == nullptr) return pilot->sample;
    scratch = pilot->sample.subset(group);
    return scratch;
}

}  // namespace

extern "C" {

const char* ppw_version(void) { return PPIPOWER_VERSION_STRING; }

const char* ppw_status_name(ppw_status status) {
    switch (status) {
        case PPW_OK: return "ok";
        case PPW_ERR_DOMAIN: return to_string(ErrorCode::domain);
        case PPW_ERR_INVALID_ARGUMENT: return to_string(ErrorCode::invalid_argument);
        case PPW_ERR_DEGENERATE: return to_string(ErrorCode::degenerate);
        case PPW_ERR_UNATTAINABLE: return to_string(ErrorCode::unattainable);
        case PPW_ERR_INFEASIBLE: return to_string(ErrorCode::infeasible);
        case PPW_ERR_SINGULAR: return to_string(ErrorCode::singular);
        case PPW_ERR_CONFIG: return to_string(ErrorCode::config);
        case PPW_ERR_PARSE: return to_string(ErrorCode::parse);
        case PPW_ERR_INTERNAL: return "internal_error";
    }
    return "unknown_status";
}

const char* ppw_last_error(void) { return g_last_error.c_str(); }

double ppw_last_error_minimal_unlabeled(void) { return g_minimal_unlabeled; }

ppw_status ppw_normal_cdf(double z, double* out) {
    PPW_REQUIRE(out);
    return guarded([&] { *out = normal_cdf(z); });
}

ppw_status ppw_normal_quantile(double q, double* out) {
    PPW_REQUIRE(out);
    return guarded([&] { *out = normal_quantile(q); });
}

ppw_status ppw_variance_threshold(const ppw_design* d, double* out) {
    PPW_REQUIRE(d);
    PPW_REQUIRE(out);
    return guarded([&] { *out = variance_threshold(from_c(*d)).s2; });
}

ppw_status ppw_calibrate_binary(const ppw_binary_metrics* m, ppw_moments* out) {
    PPW_REQUIRE(m);
    PPW_REQUIRE(out);
    return guarded([&] {
        *out = to_c(calibrate_binary({m->prevalence, m->sensitivity, m->specificity}));
    });
}

ppw_status ppw_calibrate_r2(double var_y, double r2, ppw_moments* out) {
    PPW_REQUIRE(out);
    return guarded([&] { *out = to_c(calibrate_r2(var_y, r2)); });
}

ppw_status ppw_calibrate_mse(double var_y, double mse, ppw_moments* out) {
    PPW_REQUIRE(out);
    return guarded([&] { *out = to_c(calibrate_mse(var_y, mse)); });
}

double ppw_moments_rho(const ppw_moments* m) {
    if (m == nullptr) return kNaN;
    MomentSet s;
    s.var_y = m->var_y;
    s.var_f = m->var_f;
    s.cov_yf = m->cov_yf;
    return s.rho();
}

ppw_status ppw_pilot_parse_csv(const char* text, size_t len, ppw_pilot** out) {
    PPW_REQUIRE(text);
    PPW_REQUIRE(out);
    *out = nullptr;
    return guarded([&] {
        auto pilot = std::make_unique<ppw_pilot>();
        pilot->sample = parse_pilot_csv(std::string_view(text, len));
        *out = pilot.release();
    });
}

void ppw_pilot_destroy(ppw_pilot* pilot) { delete pilot; }

size_t ppw_pilot_size(const ppw_pilot* pilot) { return pilot ? pilot->sample.size() : 0; }

ppw_status ppw_pilot_moments(const ppw_pilot* pilot, const char* group, ppw_moments* out) {
    PPW_REQUIRE(pilot);
    PPW_REQUIRE(out);
    return guarded([&] {
        PilotSample scratch;
        *out = to_c(estimate_moments(pilot_view(pilot, group, scratch)));
    });
}

ppw_status ppw_pilot_lambda(const ppw_pilot* pilot, const char* group, double r, int clamp,
                            double* lambda, ppw_warning* warning) {
    PPW_REQUIRE(pilot);
    PPW_REQUIRE(lambda);
    return guarded([&] {
        PilotSample scratch;
        const auto est = plugin_lambda(pilot_view(pilot, group, scratch), r,
                                       clamp ? std::optional<LambdaClamp>(LambdaClamp{}) : std::nullopt);
        *lambda = est.value;
        if (warning) *warning = to_c(est.warning);
    });
}

ppw_status ppw_ppi_pp_variance(const ppw_moments* m, double n, double N, double lambda, double* out) {
    PPW_REQUIRE(m);
    PPW_REQUIRE(out);
    return guarded([&] { *out = ppi_pp_variance(from_c(*m), budget(n, N), lambda); });
}

ppw_status ppw_ppi_variance(const ppw_moments* m, double n, double N, double* out) {
    PPW_REQUIRE(m);
    PPW_REQUIRE(out);
    return guarded([&] { *out = ppi_variance(from_c(*m), budget(n, N)); });
}

ppw_status ppw_lambda_star(const ppw_moments* m, double n, double N, double* lambda,
                           ppw_warning* warning) {
    PPW_REQUIRE(m);
    PPW_REQUIRE(lambda);
    return guarded([&] {
        const auto t = lambda_star(from_c(*m), budget(n, N));
        *lambda = t.lambda;
        if (warning) *warning = to_c(t.warning);
    });
}

ppw_status ppw_optimal_variance(const ppw_moments* m, double n, double N, double* out) {
    PPW_REQUIRE(m);
    PPW_REQUIRE(out);
    return guarded([&] { *out = optimal_variance(from_c(*m), budget(n, N)); });
}

ppw_status ppw_power_classical(double n, double var_y, const ppw_design* d, double* out) {
    PPW_REQUIRE(d);
    PPW_REQUIRE(out);
    return guarded([&] { *out = classical_power(n, var_y, from_c(*d)); });
}

ppw_status ppw_n_classical(double var_y, const ppw_design* d, int64_t* out) {
    PPW_REQUIRE(d);
    PPW_REQUIRE(out);
    return guarded([&] { *out = classical_n(var_y, from_c(*d)); });
}

ppw_status ppw_power_mean(const ppw_moments* m, double n, double N, const ppw_design* d, double* out) {
    PPW_REQUIRE(m);
    PPW_REQUIRE(d);
    PPW_REQUIRE(out);
    return guarded([&] { *out = ppi_pp_power(from_c(*m), budget(n, N), from_c(*d)); });
}

ppw_status ppw_n_mean(const ppw_moments* m, double N, const ppw_design* d, ppw_plan* out) {
    PPW_REQUIRE(m);
    PPW_REQUIRE(d);
    PPW_REQUIRE(out);
    return guarded([&] { *out = to_c(ppi_pp_n(from_c(*m), N, from_c(*d))); });
}

ppw_status ppw_power_mean_vanilla(const ppw_moments* m, double n, double N, const ppw_design* d,
                                  double* out) {
    PPW_REQUIRE(m);
    PPW_REQUIRE(d);
    PPW_REQUIRE(out);
    return guarded([&] { *out = vanilla_ppi_power(from_c(*m), budget(n, N), from_c(*d)); });
}

ppw_status ppw_n_mean_vanilla(const ppw_moments* m, double N, const ppw_design* d, ppw_plan* out) {
    PPW_REQUIRE(m);
    PPW_REQUIRE(d);
    PPW_REQUIRE(out);
    return guarded([&] { *out = to_c(vanilla_ppi_n(from_c(*m), N, from_c(*d))); });
}

ppw_status ppw_power_two_sample(const ppw_moments* a, const ppw_moments* b, double n, double N_a,
                                double N_b, double kappa, const ppw_design* d, double* out) {
    PPW_REQUIRE(a);
    PPW_REQUIRE(b);
    PPW_REQUIRE(d);
    PPW_REQUIRE(out);
    return guarded([&] {
        *out = two_sample_power(from_c(*a), from_c(*b), n, N_a, N_b, from_c(*d), Allocation{kappa});
    });
}

ppw_status ppw_n_two_sample(const ppw_moments* a, const ppw_moments* b, double N_a, double N_b,
                            double kappa, const ppw_design* d, ppw_plan* out) {
    PPW_REQUIRE(a);
    PPW_REQUIRE(b);
    PPW_REQUIRE(d);
    PPW_REQUIRE(out);
    return guarded([&] {
        *out = to_c(two_sample_n(from_c(*a), from_c(*b), N_a, N_b, from_c(*d), Allocation{kappa}));
    });
}

ppw_status ppw_power_paired(const ppw_moments* diff, double n, double N, const ppw_design* d,
                            double* out) {
    PPW_REQUIRE(diff);
    PPW_REQUIRE(d);
    PPW_REQUIRE(out);
    return guarded([&] {
        const DesignInputs in = from_c(*d);
        *out = wald_power(paired_variance(from_c(*diff), budget(n, N)), in.delta, in.alpha);
    });
}

ppw_status ppw_n_paired(const ppw_moments* diff, double N, const ppw_design* d, ppw_plan* out) {
    PPW_REQUIRE(diff);
    PPW_REQUIRE(d);
    PPW_REQUIRE(out);
    return guarded([&] { *out = to_c(paired_n(from_c(*diff), N, from_c(*d))); });
}

ppw_status ppw_power_two_by_two(const ppw_two_by_two* t, double n0, double alpha, double* out) {
    PPW_REQUIRE(t);
    PPW_REQUIRE(out);
    return guarded([&] { *out = two_by_two_power(from_c(*t), n0, alpha); });
}

ppw_status ppw_n_two_by_two(const ppw_two_by_two* t, const ppw_design* d, ppw_plan* out) {
    PPW_REQUIRE(t);
    PPW_REQUIRE(d);
    PPW_REQUIRE(out);
    return guarded([&] {
        ppw_design with_effect = *d;
        with_effect.delta = 1.0;  // replaced by the log effect inside the solver
        *out = to_c(two_by_two_n(from_c(*t), from_c(with_effect)));
    });
}

ppw_status ppw_power_regression(const ppw_blocks* c, double n, double N, const ppw_design* d,
                                double* out) {
    PPW_REQUIRE(c);
    PPW_REQUIRE(d);
    PPW_REQUIRE(out);
    return guarded([&] { *out = regression_contrast_power(from_c(*c), budget(n, N), from_c(*d)); });
}

ppw_status ppw_n_regression(const ppw_blocks* c, double N, const ppw_design* d, ppw_plan* out) {
    PPW_REQUIRE(c);
    PPW_REQUIRE(d);
    PPW_REQUIRE(out);
    return guarded([&] { *out = to_c(regression_contrast_n(from_c(*c), N, from_c(*d))); });
}

double ppw_rule_of_thumb(double rho2) {
    try {
        return rule_of_thumb(rho2);
    } catch (const Error& e) {
        fail(to_status(e.code()), e.what());
        return kNaN;
    }
}

ppw_status ppw_sim_config_parse(const char* text, size_t len, ppw_sim_config** out) {
    PPW_REQUIRE(text);
    PPW_REQUIRE(out);
    *out = nullptr;
    return guarded([&] {
        auto cfg = std::make_unique<ppw_sim_config>();
        cfg->config = sim::SimConfig::parse(std::string_view(text, len));
        *out = cfg.release();
    });
}

ppw_status ppw_sim_config_load(const char* path, ppw_sim_config** out) {
    PPW_REQUIRE(path);
    PPW_REQUIRE(out);
    *out = nullptr;
    return guarded([&] {
        auto cfg = std::make_unique<ppw_sim_config>();
        cfg->config = sim::SimConfig::load(path);
        *out = cfg.release();
    });
}

void ppw_sim_config_destroy(ppw_sim_config* cfg) { delete cfg; }

ppw_status ppw_sim_config_set_seed(ppw_sim_config* cfg, uint64_t seed) {
    PPW_REQUIRE(cfg);
    cfg->config.seed = seed;
    return PPW_OK;
}

ppw_status ppw_sim_config_set_threads(ppw_sim_config* cfg, int threads) {
    PPW_REQUIRE(cfg);
    if (threads < 0) return fail(PPW_ERR_CONFIG, "threads must be nonnegative");
    cfg->config.threads = threads;
    return PPW_OK;
}

ppw_status ppw_sim_config_set_replicates(ppw_sim_config* cfg, int replicates) {
    PPW_REQUIRE(cfg);
    if (replicates < 1) return fail(PPW_ERR_CONFIG, "replicates must be at least 1");
    cfg->config.replicates = replicates;
    return PPW_OK;
}

ppw_status ppw_simulate(const ppw_sim_config* cfg, ppw_sim_result** out) {
    PPW_REQUIRE(cfg);
    PPW_REQUIRE(out);
    *out = nullptr;
    return guarded([&] {
        auto res = std::make_unique<ppw_sim_result>();
        res->result = sim::run_experiment(cfg->config);
        res->csv = res->result.to_csv();
        *out = res.release();
    });
}

void ppw_sim_result_destroy(ppw_sim_result* res) { delete res; }

size_t ppw_sim_result_rows(const ppw_sim_result* res) { return res ? res->result.rows.size() : 0; }

ppw_status ppw_sim_result_row(const ppw_sim_result* res, size_t index, ppw_sim_row* out) {
    PPW_REQUIRE(res);
    PPW_REQUIRE(out);
    if (index >= res->result.rows.size()) return fail(PPW_ERR_INVALID_ARGUMENT, "row index out of range");
    const sim::SimRow& r = res->result.rows[index];
    const sim::CellSpec& c = r.cell.spec;
    const bool two = sim::is_two_group(c.design);
    // The enum-to-name tables are static arrays, so data() is NUL-terminated.
    out->design = sim::to_string(c.design).data();
    out->lambda_mode = sim::to_string(c.lambda_mode).data();
    out->n = c.n;
    out->N = c.N;
    out->n_other = two ? c.group_b_n() : -1;
    out->N_other = two ? c.group_b_N() : -1;
    out->rho_or_accuracy = sim::is_binary(c.design) ? c.accuracy : c.rho;
    out->effect = r.effect;
    out->analytic_power = r.analytic_power;
    out->empirical_power = r.empirical_power;
    out->abs_discrepancy = r.abs_discrepancy;
    out->type1 = r.type1.value_or(kNaN);
    out->lambda_rmse = r.lambda_rmse;
    out->mc_stderr = r.mc_stderr;
    out->n_dropped = r.n_dropped;
    out->target_power = r.cell.target_power.value_or(kNaN);
    out->rho_plan = r.cell.rho_plan.value_or(kNaN);
    out->pool_exhausted = r.cell.pool_exhausted ? 1 : 0;
    return PPW_OK;
}

ppw_status ppw_sim_result_csv(const ppw_sim_result* res, char* buf, size_t cap, size_t* needed) {
    PPW_REQUIRE(res);
    PPW_REQUIRE(needed);
    *needed = res->csv.size() + 1;
    if (buf == nullptr || cap < *needed) {
        return fail(PPW_ERR_INVALID_ARGUMENT, "buffer too small for CSV output");
    }
    std::memcpy(buf, res->csv.c_str(), *needed);
    return PPW_OK;
}

}  // extern "C"
