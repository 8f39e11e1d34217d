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

#include "ppipower/sim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>

#include "ppipower/design.hpp"
#include "ppipower/error.hpp"
#include "ppipower/power.hpp"
#include "ppipower/sim/estimators.hpp"
#include "ppipower/variance.hpp"

namespace ppipower::sim {

namespace {

// Substream ids within one (cell, replicate).
enum Stream : std::uint64_t { kData = 0, kFolds = 1, kNullData = 2, kNullFolds = 3, kReference = 4 };

struct Replicate {
    bool reject = false;
    bool dropped = false;
    double lambda_sq_error = 0.0;
    int lambda_count = 0;
};

SampleBudget budget(int n, int N) { return {.n = static_cast<double>(n), .N = static_cast<double>(N)}; }

double ratio(int n, int N) { return static_cast<double>(n) / static_cast<double>(N); }

double tuned_lambda(const MeanSample& s, const MomentSet& truth, const CellSpec& c, Rng& folds,
                    Replicate& rep) {
    const int n = static_cast<int>(s.y.size());
    const int N = static_cast<int>(s.f_unlabeled.size());
    const double oracle = lambda_star(truth, budget(n, N)).lambda;
    double lambda = oracle;
    switch (c.lambda_mode) {
        case LambdaMode::oracle:
            return oracle;
        case LambdaMode::plugin:
            lambda = plugin_lambda(std::span<const double>(s.y), std::span<const double>(s.f), ratio(n, N)).value;
            break;
        case LambdaMode::crossfit:
            lambda = crossfit_lambda(s.y, s.f, c.folds, ratio(n, N), folds);
            break;
        case LambdaMode::classical:
            return 0.0;
        case LambdaMode::vanilla:
            return 1.0;
    }
    rep.lambda_sq_error += (lambda - oracle) * (lambda - oracle);
    rep.lambda_count += 1;
    return lambda;
}

double log_scale_variance(double p, double var, RiskMeasure m) {
    const double scale = m == RiskMeasure::relative_risk ? p : p * (1.0 - p);
    return var / (scale * scale);
}

double log_scale(double p, RiskMeasure m) {
    return m == RiskMeasure::relative_risk ? std::log(p) : std::log(p / (1.0 - p));
}

Replicate simulate_once(const CellSpec& c, const CellTruth& truth, Rng& data, Rng& folds) {
    Replicate rep;
    const Dataset ds = generate(c, truth, data);
    const double theta0 = 0.0;
    switch (c.design) {
        case Design::one_sample_cont:
        case Design::one_sample_bin:
        case Design::paired_cont:
        case Design::paired_bin: {
            const auto& s = std::get<MeanSample>(ds);
            const double lambda = tuned_lambda(s, truth.a, c, folds, rep);
            const MeanFit fit = ppi_mean(s, lambda);
            const double null_value = c.design == Design::one_sample_bin ? c.p_base : theta0;
            rep.reject = wald_test(fit.estimate, fit.variance, null_value, c.alpha).reject;
            break;
        }
        case Design::two_sample_cont:
        case Design::two_sample_bin: {
            const auto& s = std::get<TwoGroupSample>(ds);
            const MeanFit fa = ppi_mean(s.a, tuned_lambda(s.a, truth.a, c, folds, rep));
            const MeanFit fb = ppi_mean(s.b, tuned_lambda(s.b, truth.b, c, folds, rep));
            rep.reject =
                wald_test(fb.estimate - fa.estimate, fa.variance + fb.variance, theta0, c.alpha).reject;
            break;
        }
        case Design::two_by_two_rr:
        case Design::two_by_two_or: {
            const auto& s = std::get<TwoGroupSample>(ds);
            const MeanFit f0 = ppi_mean(s.a, tuned_lambda(s.a, truth.a, c, folds, rep));
            const MeanFit f1 = ppi_mean(s.b, tuned_lambda(s.b, truth.b, c, folds, rep));
            const RiskMeasure m = truth.table.measure;
            auto interior = [](double p) { return p > 0.0 && p < 1.0; };
            if (!interior(f0.estimate) || !interior(f1.estimate)) break;  // degenerate: no rejection
            const double est = log_scale(f1.estimate, m) - log_scale(f0.estimate, m);
            const double var = log_scale_variance(f0.estimate, f0.variance, m) +
                               log_scale_variance(f1.estimate, f1.variance, m);
            rep.reject = wald_test(est, var, theta0, c.alpha).reject;
            break;
        }
        case Design::ols_contrast:
        case Design::logistic_contrast: {
            const auto& s = std::get<RegressionSample>(ds);
            const Eigen::VectorXd a = contrast_vector();
            const Link link = c.design == Design::ols_contrast ? Link::identity : Link::logit;
            const double oracle = contrast_lambda_star(truth.blocks, budget(c.n, c.N)).lambda;
            double lambda = oracle;
            if (c.lambda_mode == LambdaMode::plugin) {
                lambda = regression_plugin_lambda(s, link, a);
            } else if (c.lambda_mode == LambdaMode::crossfit) {
                lambda = regression_crossfit_lambda(s, link, c.folds, a, folds);
            } else if (c.lambda_mode == LambdaMode::classical) {
                lambda = 0.0;
            } else if (c.lambda_mode == LambdaMode::vanilla) {
                lambda = 1.0;
            }
            if (c.lambda_mode == LambdaMode::plugin || c.lambda_mode == LambdaMode::crossfit) {
                rep.lambda_sq_error += (lambda - oracle) * (lambda - oracle);
                rep.lambda_count = 1;
            }
            Eigen::VectorXd beta;
            try {
                if (link == Link::identity) {
                    beta = rectified_ols_solve(s, lambda);
                } else {
                    const LogisticFit fit = rectified_logistic_solve(s, lambda);
                    if (!fit.converged) {
                        rep.dropped = true;
                        return rep;
                    }
                    beta = fit.beta;
                }
                const double se = sandwich_se(s, link, beta, lambda, a);
                rep.reject = wald_test(a.dot(beta), se * se, theta0, c.alpha).reject;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::singular) throw;
                rep.dropped = true;
            }
            break;
        }
    }
    return rep;
}

struct Tally {
    int used = 0;
    int dropped = 0;
    int rejections = 0;
    double lambda_sq_error = 0.0;
    int lambda_count = 0;
};

// Runs replicates [0, R) across threads; each slot is written by exactly one
// worker and the reduction walks slots in order, so output is schedule-free.
Tally run_replicates(const CellSpec& c, const CellTruth& truth, std::uint64_t seed,
                     std::uint64_t cell_index, std::uint64_t data_stream, std::uint64_t fold_stream,
                     int threads) {
    const int R = c.replicates;
    std::vector<Replicate> slots(static_cast<std::size_t>(R));
    auto work = [&](int begin, int end) {
        for (int r = begin; r < end; ++r) {
            Rng data = Rng::substream(seed, cell_index, static_cast<std::uint64_t>(r), data_stream);
            Rng folds = Rng::substream(seed, cell_index, static_cast<std::uint64_t>(r), fold_stream);
            slots[static_cast<std::size_t>(r)] = simulate_once(c, truth, data, folds);
        }
    };
    const int workers = std::clamp(threads, 1, R);
    if (workers == 1) {
        work(0, R);
    } else {
        std::vector<std::jthread> pool;
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            const int begin = static_cast<int>(static_cast<long long>(R) * w / workers);
            const int end = static_cast<int>(static_cast<long long>(R) * (w + 1) / workers);
            pool.emplace_back([&, w, begin, end] {
                try {
                    work(begin, end);
                } catch (...) {
                    errors[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
        }
        pool.clear();
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }
    Tally t;
    for (const Replicate& rep : slots) {
        if (rep.dropped) {
            ++t.dropped;
            continue;
        }
        ++t.used;
        t.rejections += rep.reject ? 1 : 0;
        t.lambda_sq_error += rep.lambda_sq_error;
        t.lambda_count += rep.lambda_count;
    }
    return t;
}

double fraction(const Tally& t) {
    return t.used > 0 ? static_cast<double>(t.rejections) / static_cast<double>(t.used) : 0.0;
}

DesignInputs inputs_for(const CellSpec& c, double target_power, double effect) {
    DesignInputs d;
    d.alpha = c.alpha;
    d.target_power = target_power;
    d.delta = effect;
    return d;
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string format_optional(const std::optional<double>& v) {
    return v ? format_number(*v) : std::string("NA");
}

// Variance of the estimator the cell actually runs. Tuned modes share the
// oracle comparator.
double mode_variance(const MomentSet& m, const SampleBudget& b, LambdaMode mode) {
    switch (mode) {
        case LambdaMode::classical: return ppi_pp_variance(m, b, 0.0);
        case LambdaMode::vanilla: return ppi_pp_variance(m, b, 1.0);
        default: return optimal_variance(m, b);
    }
}

double mode_variance(const ContrastBlocks& c, const SampleBudget& b, LambdaMode mode) {
    switch (mode) {
        case LambdaMode::classical: return contrast_variance(c, b, 0.0);
        case LambdaMode::vanilla: return contrast_variance(c, b, 1.0);
        default: return contrast_optimal_variance(c, b);
    }
}

// Labeled moments whose single-group plan equals the design's plan: a
// balanced two-sample difference doubles every moment, an OLS contrast reads
// its blocks as moments.
MomentSet planning_moments(Design design, const CellTruth& truth) {
    switch (design) {
        case Design::one_sample_cont:
        case Design::one_sample_bin:
        case Design::paired_cont:
        case Design::paired_bin:
            return truth.a;
        case Design::two_sample_cont:
        case Design::two_sample_bin:
            return MomentSet::from_covariance(truth.a.var_y + truth.b.var_y, truth.a.var_f + truth.b.var_f,
                                              truth.a.cov_yf + truth.b.cov_yf);
        case Design::ols_contrast:
            return MomentSet::from_covariance(truth.blocks.v_yy, truth.blocks.v_ff, truth.blocks.v_yf);
        default:
            throw Error(ErrorCode::config,
                        "planned-n experiments support mean, paired, two-sample and OLS designs");
    }
}

PlanResult plan_cell(Design design, LambdaMode mode, const CellTruth& truth, int N, const DesignInputs& d) {
    const MomentSet m = planning_moments(design, truth);
    PlanResult pr;
    if (mode == LambdaMode::classical) {
        pr.n_star = classical_n(m.var_y, d);
    } else if (mode == LambdaMode::vanilla) {
        pr = vanilla_ppi_n(m, N, d);
    } else if (design == Design::two_sample_cont || design == Design::two_sample_bin) {
        pr = two_sample_n(truth.a, truth.b, N, N, d);
    } else if (design == Design::ols_contrast) {
        pr = regression_contrast_n(truth.blocks, N, d);
    } else {
        pr = ppi_pp_n(m, N, d);
    }
    if (is_two_group(design) && !pr.n_star_other) pr.n_star_other = pr.n_star;
    return pr;
}

SimCell plain_cell(const CellSpec& c) {
    SimCell cell;
    cell.spec = c;
    return cell;
}

}  // namespace

double cell_analytic_power(const CellSpec& cell, const ContrastBlocks* logistic_blocks) {
    CellTruth truth = cell_truth(cell);
    if (cell.design == Design::logistic_contrast) {
        if (logistic_blocks == nullptr) {
            throw Error(ErrorCode::invalid_argument, "logistic cells need reference blocks");
        }
        truth.blocks = *logistic_blocks;
    }
    const int nb = cell.group_b_n();
    const int Nb = cell.group_b_N();
    const LambdaMode mode = cell.lambda_mode;
    double variance = 0.0;
    switch (cell.design) {
        case Design::one_sample_cont:
        case Design::one_sample_bin:
        case Design::paired_cont:
        case Design::paired_bin:
            variance = mode_variance(truth.a, budget(cell.n, cell.N), mode);
            break;
        case Design::two_sample_cont:
        case Design::two_sample_bin:
            variance = mode_variance(truth.a, budget(cell.n, cell.N), mode) +
                       mode_variance(truth.b, budget(nb, Nb), mode);
            break;
        case Design::two_by_two_rr:
        case Design::two_by_two_or: {
            const RiskMeasure m = truth.table.measure;
            variance = log_scale_variance(truth.table.p0, mode_variance(truth.a, budget(cell.n, cell.N), mode), m) +
                       log_scale_variance(truth.table.p1, mode_variance(truth.b, budget(nb, Nb), mode), m);
            break;
        }
        case Design::ols_contrast:
        case Design::logistic_contrast:
            variance = mode_variance(truth.blocks, budget(cell.n, cell.N), mode);
            break;
    }
    return wald_power(variance, truth.effect, cell.alpha);
}

SimRow run_cell(const SimCell& cell, std::uint64_t cell_index, const RunOptions& opt) {
    const CellSpec& c = cell.spec;
    c.validate();
    SimRow row;
    row.cell = cell;
    CellTruth truth = cell_truth(c);
    std::optional<ContrastBlocks> reference;
    if (c.design == Design::logistic_contrast) {
        Rng rng = Rng::substream(opt.seed, cell_index, 0, kReference);
        reference = glm_reference_blocks(c, opt.reference_samples, rng);
        truth.blocks = *reference;
    }
    row.effect = truth.effect;
    row.analytic_power = cell_analytic_power(c, reference ? &*reference : nullptr);

    const Tally t = run_replicates(c, truth, opt.seed, cell_index, kData, kFolds, opt.threads);
    row.n_used = t.used;
    row.n_dropped = t.dropped;
    row.empirical_power = fraction(t);
    row.abs_discrepancy = std::abs(row.empirical_power - row.analytic_power);
    row.mc_stderr = t.used > 0 ? std::sqrt(row.empirical_power * (1.0 - row.empirical_power) / t.used) : 0.0;
    row.lambda_rmse = t.lambda_count > 0 ? std::sqrt(t.lambda_sq_error / t.lambda_count) : 0.0;

    if (opt.null_runs) {
        CellSpec null_cell = c;
        null_cell.null_effect = true;
        if (opt.null_replicates > 0) null_cell.replicates = opt.null_replicates;
        CellTruth null_truth = cell_truth(null_cell);
        if (null_cell.design == Design::logistic_contrast) {
            Rng rng = Rng::substream(opt.seed, cell_index, 1, kReference);
            null_truth.blocks = glm_reference_blocks(null_cell, opt.reference_samples, rng);
        }
        const Tally n0 =
            run_replicates(null_cell, null_truth, opt.seed, cell_index, kNullData, kNullFolds, opt.threads);
        row.type1 = fraction(n0);
    }
    return row;
}

std::vector<SimCell> expand_cells(const SimConfig& cfg) {
    cfg.validate();
    std::vector<SimCell> cells;
    CellSpec base;
    base.design = cfg.design;
    base.dist = cfg.outcome_dist;
    base.p_base = cfg.p_base;
    base.within_pair_corr = cfg.within_pair_corr;
    base.alpha = cfg.alpha;
    base.lambda_mode = cfg.lambda_mode;
    base.folds = cfg.folds;
    base.replicates = cfg.replicates;
    const bool binary = is_binary(cfg.design);
    const std::vector<double>& quality = binary ? cfg.accuracy : cfg.rho;
    auto with_quality = [&](CellSpec c, double q) {
        (binary ? c.accuracy : c.rho) = q;
        return c;
    };
    const bool table = cfg.design == Design::two_by_two_rr || cfg.design == Design::two_by_two_or;
    const std::vector<double> effects = table ? cfg.p_treat : cfg.delta;
    auto with_effect = [&](CellSpec c, double e) {
        (table ? c.p_treat : c.delta) = e;
        return c;
    };

    switch (cfg.experiment) {
        case Experiment::grid:
            for (double e : effects)
                for (double q : quality)
                    for (int N : cfg.N)
                        for (int n : cfg.n) {
                            CellSpec c = with_quality(with_effect(base, e), q);
                            c.n = n;
                            c.N = N;
                            cells.push_back(plain_cell(c));
                        }
            break;
        case Experiment::inversion_check:
        case Experiment::misspecified_rho: {
            const bool misspec = cfg.experiment == Experiment::misspecified_rho;
            const std::vector<double> shifts = misspec ? cfg.rho_shift : std::vector<double>{0.0};
            for (double e : effects)
                for (int N : cfg.N)
                    for (double q : quality)
                        for (double tp : cfg.target_power)
                            for (double shift : shifts) {
                                CellSpec plan = with_quality(with_effect(base, e), q);
                                plan.N = N;
                                const double truth_q = q + shift;
                                if (misspec && !(truth_q > 0.01 && truth_q < 0.99)) continue;
                                const CellTruth truth = cell_truth(plan);
                                const DesignInputs d = inputs_for(plan, tp, truth.effect);
                                const PlanResult pr = plan_cell(cfg.design, cfg.lambda_mode, truth, N, d);
                                CellSpec c = misspec ? with_quality(plan, truth_q) : plan;
                                c.n = static_cast<int>(std::max<std::int64_t>(pr.n_star, 2));
                                if (pr.n_star_other) c.n_other = static_cast<int>(*pr.n_star_other);
                                SimCell cell = plain_cell(c);
                                cell.target_power = tp;
                                if (misspec) cell.rho_plan = q;
                                cell.pool_exhausted = pr.pool_exhausted;
                                cells.push_back(cell);
                            }
            break;
        }
        case Experiment::unequal_groups:
            for (double e : effects)
                for (double q : quality)
                    for (double k : cfg.allocation) {
                        CellSpec c = with_quality(with_effect(base, e), q);
                        c.n = static_cast<int>(std::lround(cfg.n_total * k / (1.0 + k)));
                        c.n_other = cfg.n_total - c.n;
                        c.N = static_cast<int>(std::lround(cfg.N_total * k / (1.0 + k)));
                        c.N_other = cfg.N_total - c.N;
                        cells.push_back(plain_cell(c));
                    }
            break;
    }
    for (const SimCell& c : cells) c.spec.validate();
    return cells;
}

SimResult run_experiment(const SimConfig& cfg) {
    const std::vector<SimCell> cells = expand_cells(cfg);
    RunOptions opt;
    opt.seed = cfg.seed;
    opt.threads = cfg.threads > 0 ? cfg.threads
                                  : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    opt.reference_samples = cfg.reference_samples;
    opt.null_runs = cfg.null_runs;
    opt.null_replicates = cfg.null_replicates;
    SimResult out;
    out.rows.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) out.rows.push_back(run_cell(cells[i], i, opt));
    return out;
}

std::string SimResult::to_csv() const {
    std::string out =
        "design,n,N,rho_or_accuracy,delta,lambda_mode,analytic_power,empirical_power,type1,"
        "lambda_rmse,mc_stderr,n_dropped,n_other,N_other,target_power,rho_plan,pool_exhausted\n";
    for (const SimRow& r : rows) {
        const CellSpec& c = r.cell.spec;
        const double quality = is_binary(c.design) ? c.accuracy : c.rho;
        const bool two = is_two_group(c.design);
        out += std::string(to_string(c.design)) + ',' + std::to_string(c.n) + ',' + std::to_string(c.N) +
               ',' + format_number(quality) + ',' + format_number(r.effect) + ',' +
               std::string(to_string(c.lambda_mode)) + ',' + format_number(r.analytic_power) + ',' +
               format_number(r.empirical_power) + ',' + format_optional(r.type1) + ',' +
               format_number(r.lambda_rmse) + ',' + format_number(r.mc_stderr) + ',' +
               std::to_string(r.n_dropped) + ',' + (two ? std::to_string(c.group_b_n()) : "NA") + ',' +
               (two ? std::to_string(c.group_b_N()) : "NA") + ',' + format_optional(r.cell.target_power) +
               ',' + format_optional(r.cell.rho_plan) + ',' + (r.cell.pool_exhausted ? "true" : "false") +
               '\n';
    }
    return out;
}

}  // namespace ppipower::sim
