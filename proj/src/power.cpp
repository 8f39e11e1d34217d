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

#include "ppipower/power.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace ppipower {

namespace {

constexpr std::int64_t kMaxCount = std::int64_t{1} << 52;

void require_effect(const DesignInputs& d) {
    d.validate();
    if (d.delta == 0.0) {
        throw Error(ErrorCode::unattainable, "effect size is zero: no sample size reaches the target power");
    }
}

void require_outcome_variance(double var_y) {
    if (!(var_y > 0.0) || !std::isfinite(var_y)) {
        throw Error(ErrorCode::invalid_argument, "outcome variance must be positive and finite");
    }
}

// Smallest integer n >= 1 with fits(n), starting from a closed-form guess of
// the real root. fits() must be monotone in n.
std::int64_t smallest_count(const std::function<bool(double)>& fits, double guess) {
    std::int64_t n = 1;
    if (std::isfinite(guess) && guess > 1.0) {
        n = static_cast<std::int64_t>(std::min(std::ceil(guess), static_cast<double>(kMaxCount)));
    }
    while (n > 1 && fits(static_cast<double>(n - 1))) --n;
    while (!fits(static_cast<double>(n))) {
        if (n >= kMaxCount) throw Error(ErrorCode::infeasible, "required sample size overflows");
        ++n;
    }
    return n;
}

// Positive root of S2 n^2 + (S2 N - v) n - N (v - explained) = 0, written to
// avoid cancellation when S2 N > v. N may be infinite.
double quadratic_root(double s2, double N, double v, double explained) {
    const double residual = std::max(0.0, v - explained);
    if (std::isinf(N)) return residual / s2;
    const double b = s2 * N - v;
    const double c = N * residual;
    const double disc = std::sqrt(b * b + 4.0 * s2 * c);
    if (b <= 0.0) return (-b + disc) / (2.0 * s2);
    return 2.0 * c / (b + disc);
}

void finish(PlanResult& r, double N) {
    r.reduction = r.classical_n > 0
                      ? 1.0 - static_cast<double>(r.n_star) / static_cast<double>(r.classical_n)
                      : 0.0;
    r.pool_exhausted = std::isfinite(N) && static_cast<double>(r.n_star) > N;
}

}  // namespace

double classical_power(double n, double var_y, const DesignInputs& d) {
    d.validate();
    require_outcome_variance(var_y);
    if (!(n >= 1.0)) throw Error(ErrorCode::invalid_argument, "n must be >= 1");
    return wald_power(var_y / n, d.delta, d.alpha);
}

std::int64_t classical_n(double var_y, const DesignInputs& d) {
    require_effect(d);
    require_outcome_variance(var_y);
    const double s2 = variance_threshold(d).s2;
    return smallest_count([&](double n) { return var_y / n <= s2; }, var_y / s2);
}

double ppi_pp_power(const MomentSet& m, const SampleBudget& b, const DesignInputs& d) {
    d.validate();
    return wald_power(optimal_variance(m, b), d.delta, d.alpha);
}

double vanilla_ppi_power(const MomentSet& m, const SampleBudget& b, const DesignInputs& d) {
    d.validate();
    return wald_power(ppi_variance(m, b), d.delta, d.alpha);
}

PlanResult ppi_pp_n(const MomentSet& m, double N, const DesignInputs& d) {
    require_effect(d);
    require_outcome_variance(m.var_y);
    if (!(N >= 1.0)) throw Error(ErrorCode::invalid_argument, "unlabeled count N must be >= 1");
    const double s2 = variance_threshold(d).s2;

    PlanResult r;
    r.classical_n = classical_n(m.var_y, d);
    if (m.var_f == 0.0 || m.cov_yf == 0.0) {
        // Uninformative predictions: the classical design, exactly.
        r.n_star = r.classical_n;
        r.n_exact = m.var_y / s2;
        if (m.var_f == 0.0) r.warning = Warning::zero_prediction_variance;
    } else {
        const double explained = m.cov_yf * m.cov_yf / m.var_f;
        r.n_exact = quadratic_root(s2, N, m.var_y, explained);
        r.n_star = smallest_count(
            [&](double n) { return optimal_variance(m, SampleBudget{n, N}) <= s2; }, r.n_exact);
    }
    const SampleBudget at{static_cast<double>(r.n_star), N};
    r.variance = optimal_variance(m, at);
    r.analytic_power = wald_power(r.variance, d.delta, d.alpha);
    r.lambda_star = lambda_star(m, at).lambda;
    finish(r, N);
    return r;
}

PlanResult vanilla_ppi_n(const MomentSet& m, double N, const DesignInputs& d) {
    require_effect(d);
    require_outcome_variance(m.var_y);
    if (!(N >= 1.0)) throw Error(ErrorCode::invalid_argument, "unlabeled count N must be >= 1");
    const double s2 = variance_threshold(d).s2;
    const double pool_noise = std::isinf(N) ? 0.0 : m.var_f / N;
    if (s2 <= pool_noise) {
        const double minimal = std::floor(m.var_f / s2) + 1.0;
        throw Error(ErrorCode::infeasible,
                    "vanilla PPI cannot reach the target power with this unlabeled pool; N must exceed " +
                        std::to_string(static_cast<long long>(minimal) - 1),
                    minimal);
    }
    PlanResult r;
    r.classical_n = classical_n(m.var_y, d);
    r.n_exact = m.var_eps() / (s2 - pool_noise);
    r.n_star = smallest_count(
        [&](double n) { return ppi_variance(m, SampleBudget{n, N}) <= s2; }, r.n_exact);
    r.variance = ppi_variance(m, SampleBudget{static_cast<double>(r.n_star), N});
    r.analytic_power = wald_power(r.variance, d.delta, d.alpha);
    r.lambda_star = 1.0;
    finish(r, N);
    return r;
}

double rule_of_thumb(double rho2) {
    if (!(rho2 >= 0.0 && rho2 <= 1.0)) {
        throw Error(ErrorCode::invalid_argument, "rho^2 must lie in [0, 1]");
    }
    return 1.0 - rho2;
}

namespace {

double group_variance(const MomentSet& m, double n, double N) {
    if (m.var_f == 0.0) return m.var_y / n;
    const double factor = std::isinf(N) ? 1.0 : N / (n + N);
    return m.var_y / n - (m.cov_yf * m.cov_yf / m.var_f) * factor / n;
}

struct TwoGroupSolution {
    double root;
    std::int64_t n_a;
    std::int64_t n_b;
};

TwoGroupSolution solve_two_group(const MomentSet& a, const MomentSet& b, double N_a, double N_b,
                                 double kappa, double s2) {
    const auto total = [&](double n) {
        return group_variance(a, n, N_a) + group_variance(b, kappa * n, N_b);
    };
    const auto fits = [&](double n) { return total(n) <= s2; };

    // The summed variance is decreasing in n and never exceeds the
    // labeled-only value, so the classical root brackets from above.
    double lo = 0.0;
    double hi = (a.var_y + b.var_y / kappa) / s2;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (fits(mid) ? hi : lo) = mid;
    }
    const double root = hi;
    if (kappa == 1.0) {
        const auto n = smallest_count(fits, root);
        return {root, n, n};
    }
    const auto n_a = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(root)));
    const auto n_b = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(kappa * root)));
    return {root, n_a, n_b};
}

}  // namespace

double two_sample_power(const MomentSet& a, const MomentSet& b, double n, double N_a, double N_b,
                        const DesignInputs& d, Allocation alloc) {
    d.validate();
    const TwoGroupMoments t{a, b, SampleBudget{n, N_a, alloc.kappa},
                            SampleBudget{std::max(1.0, alloc.kappa * n), N_b, alloc.kappa}};
    return wald_power(two_sample_variance(t), d.delta, d.alpha);
}

PlanResult two_sample_n(const MomentSet& a, const MomentSet& b, double N_a, double N_b,
                        const DesignInputs& d, Allocation alloc) {
    require_effect(d);
    require_outcome_variance(a.var_y);
    require_outcome_variance(b.var_y);
    if (!(N_a >= 1.0) || !(N_b >= 1.0)) {
        throw Error(ErrorCode::invalid_argument, "unlabeled counts must be >= 1");
    }
    if (!(alloc.kappa > 0.0) || !std::isfinite(alloc.kappa)) {
        throw Error(ErrorCode::invalid_argument, "allocation ratio must be positive");
    }
    const double s2 = variance_threshold(d).s2;
    const auto plan = solve_two_group(a, b, N_a, N_b, alloc.kappa, s2);

    MomentSet a_cl = a, b_cl = b;
    a_cl.cov_yf = 0.0;
    b_cl.cov_yf = 0.0;
    const auto classical = solve_two_group(a_cl, b_cl, N_a, N_b, alloc.kappa, s2);

    PlanResult r;
    r.n_exact = plan.root;
    r.n_star = plan.n_a;
    r.n_star_other = plan.n_b;
    r.classical_n = classical.n_a;
    r.classical_n_other = classical.n_b;
    const double na = static_cast<double>(plan.n_a), nb = static_cast<double>(plan.n_b);
    r.variance = group_variance(a, na, N_a) + group_variance(b, nb, N_b);
    r.analytic_power = wald_power(r.variance, d.delta, d.alpha);
    r.lambda_star = lambda_star(a, SampleBudget{na, N_a}).lambda;
    r.lambda_star_other = lambda_star(b, SampleBudget{nb, N_b}).lambda;
    r.reduction = 1.0 - (na + nb) / static_cast<double>(classical.n_a + classical.n_b);
    r.pool_exhausted = (std::isfinite(N_a) && na > N_a) || (std::isfinite(N_b) && nb > N_b);
    return r;
}

PlanResult paired_n(const MomentSet& diff, double N, const DesignInputs& d) {
    return ppi_pp_n(diff, N, d);
}

double two_by_two_power(const TwoByTwoSpec& s, double n0, double alpha) {
    return wald_power(log_measure_variance(s, n0), s.log_effect(), alpha);
}

PlanResult two_by_two_n(const TwoByTwoSpec& s, const DesignInputs& d) {
    s.validate();
    if (s.p0 == s.p1) {
        throw Error(ErrorCode::unattainable, "p0 == p1: zero effect, no sample size reaches the target power");
    }
    const DesignInputs design = d.with_delta(s.log_effect());
    design.validate();
    const double s2 = variance_threshold(design).s2;

    const auto count_for = [&](const TwoByTwoSpec& spec, double& root) {
        root = log_measure_variance(spec, 1.0) / s2;
        return smallest_count([&](double n0) { return log_measure_variance(spec, n0) <= s2; }, root);
    };

    PlanResult r;
    r.n_star = count_for(s, r.n_exact);
    r.n_star_other = static_cast<std::int64_t>(std::ceil(s.kappa * static_cast<double>(r.n_star)));

    TwoByTwoSpec classical = s;
    classical.rho0 = 0.0;
    classical.rho1 = 0.0;
    double classical_root = 0.0;
    r.classical_n = count_for(classical, classical_root);
    r.classical_n_other =
        static_cast<std::int64_t>(std::ceil(s.kappa * static_cast<double>(r.classical_n)));

    r.variance = log_measure_variance(s, static_cast<double>(r.n_star));
    r.analytic_power = wald_power(r.variance, design.delta, d.alpha);
    r.reduction = 1.0 - static_cast<double>(r.n_star + *r.n_star_other) /
                            static_cast<double>(r.classical_n + *r.classical_n_other);
    return r;
}

double regression_contrast_power(const ContrastBlocks& c, const SampleBudget& b,
                                 const DesignInputs& d) {
    d.validate();
    return wald_power(contrast_optimal_variance(c, b), d.delta, d.alpha);
}

PlanResult regression_contrast_n(const ContrastBlocks& c, double N, const DesignInputs& d) {
    require_effect(d);
    c.validate();
    if (!(c.v_yy > 0.0)) throw Error(ErrorCode::invalid_argument, "V_YY must be positive");
    if (!(N >= 1.0)) throw Error(ErrorCode::invalid_argument, "unlabeled count N must be >= 1");
    const double s2 = variance_threshold(d).s2;

    const ContrastBlocks classical{c.v_yy, c.v_ff, 0.0};
    PlanResult r;
    r.classical_n = smallest_count(
        [&](double n) { return contrast_optimal_variance(classical, SampleBudget{n, N}) <= s2; },
        c.v_yy / s2);
    if (c.v_ff == 0.0 || c.v_yf == 0.0) {
        r.n_star = r.classical_n;
        r.n_exact = c.v_yy / s2;
        if (c.v_ff == 0.0) r.warning = Warning::zero_prediction_variance;
    } else {
        r.n_exact = quadratic_root(s2, N, c.v_yy, c.v_yf * c.v_yf / c.v_ff);
        r.n_star = smallest_count(
            [&](double n) { return contrast_optimal_variance(c, SampleBudget{n, N}) <= s2; },
            r.n_exact);
    }
    const SampleBudget at{static_cast<double>(r.n_star), N};
    r.variance = contrast_optimal_variance(c, at);
    r.analytic_power = wald_power(r.variance, d.delta, d.alpha);
    r.lambda_star = contrast_lambda_star(c, at).lambda;
    finish(r, N);
    return r;
}

}  // namespace ppipower
