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

#include "ppipower/variance.hpp"

#include <cmath>

namespace ppipower {

namespace {

bool interior(double p) { return p > 0.0 && p < 1.0; }

// N / (n + N), exact 1 in the infinite-pool limit.
double pool_factor(const SampleBudget& b) {
    if (std::isinf(b.N)) return 1.0;
    return b.N / (b.n + b.N);
}

}  // namespace

void SampleBudget::validate() const {
    if (!(n >= 1.0) || !std::isfinite(n)) {
        throw Error(ErrorCode::invalid_argument, "labeled count n must be >= 1");
    }
    if (!(N >= 1.0)) throw Error(ErrorCode::invalid_argument, "unlabeled count N must be >= 1");
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
        throw Error(ErrorCode::invalid_argument, "allocation ratio kappa must be positive");
    }
}

void TwoByTwoSpec::validate() const {
    if (!interior(p0) || !interior(p1)) {
        throw Error(ErrorCode::degenerate, "event probabilities must lie strictly inside (0, 1)");
    }
    if (!(std::abs(rho0) <= 1.0) || !(std::abs(rho1) <= 1.0)) {
        throw Error(ErrorCode::invalid_argument, "correlations must lie in [-1, 1]");
    }
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
        throw Error(ErrorCode::invalid_argument, "allocation ratio kappa must be positive");
    }
}

double TwoByTwoSpec::log_effect() const {
    validate();
    if (measure == RiskMeasure::relative_risk) return std::log(p1 / p0);
    return std::log(p1 / (1.0 - p1)) - std::log(p0 / (1.0 - p0));
}

void ContrastBlocks::validate() const {
    if (!std::isfinite(v_yy) || !std::isfinite(v_ff) || !std::isfinite(v_yf)) {
        throw Error(ErrorCode::invalid_argument, "contrast blocks must be finite");
    }
    if (v_yy < 0.0 || v_ff < 0.0) {
        throw Error(ErrorCode::invalid_argument, "contrast variances must be nonnegative");
    }
    if (v_yf * v_yf > v_yy * v_ff * (1.0 + 1e-12) + 1e-300) {
        throw Error(ErrorCode::invalid_argument, "contrast blocks violate V_Yf^2 <= V_YY V_ff");
    }
}

double ppi_pp_variance(const MomentSet& m, const SampleBudget& b, double lambda) {
    b.validate();
    const double inv_N = std::isinf(b.N) ? 0.0 : 1.0 / b.N;
    return m.var_y / b.n + lambda * lambda * m.var_f * (inv_N + 1.0 / b.n) -
           2.0 * lambda * m.cov_yf / b.n;
}

double ppi_variance(const MomentSet& m, const SampleBudget& b) {
    b.validate();
    const double inv_N = std::isinf(b.N) ? 0.0 : 1.0 / b.N;
    return m.var_f * inv_N + m.var_eps() / b.n;
}

TuningParameter lambda_star(const MomentSet& m, const SampleBudget& b) {
    b.validate();
    if (m.var_f == 0.0) return {0.0, Warning::zero_prediction_variance};
    return {m.cov_yf / ((1.0 + b.ratio()) * m.var_f), Warning::none};
}

double optimal_variance(const MomentSet& m, const SampleBudget& b) {
    b.validate();
    if (m.var_f == 0.0) return m.var_y / b.n;
    const double explained = m.cov_yf * m.cov_yf / m.var_f;
    return m.var_y / b.n - explained * pool_factor(b) / b.n;
}

double two_sample_variance(const TwoGroupMoments& t) {
    return optimal_variance(t.a, t.budget_a) + optimal_variance(t.b, t.budget_b);
}

double paired_variance(const MomentSet& diff, const SampleBudget& b) {
    return optimal_variance(diff, b);
}

double log_rr_variance(const TwoByTwoSpec& s, double n0) {
    s.validate();
    if (!(n0 > 0.0)) throw Error(ErrorCode::invalid_argument, "n0 must be positive");
    const double control = (1.0 - s.p0) * (1.0 - s.rho0 * s.rho0) / s.p0;
    const double treated = (1.0 - s.p1) * (1.0 - s.rho1 * s.rho1) / s.p1;
    return (control + treated / s.kappa) / n0;
}

double log_or_variance(const TwoByTwoSpec& s, double n0) {
    s.validate();
    if (!(n0 > 0.0)) throw Error(ErrorCode::invalid_argument, "n0 must be positive");
    const double control = (1.0 - s.rho0 * s.rho0) / (s.p0 * (1.0 - s.p0));
    const double treated = (1.0 - s.rho1 * s.rho1) / (s.p1 * (1.0 - s.p1));
    return (control + treated / s.kappa) / n0;
}

double log_measure_variance(const TwoByTwoSpec& s, double n0) {
    return s.measure == RiskMeasure::relative_risk ? log_rr_variance(s, n0) : log_or_variance(s, n0);
}

double contrast_variance(const ContrastBlocks& c, const SampleBudget& b, double lambda) {
    c.validate();
    b.validate();
    return (c.v_yy + lambda * lambda * (1.0 + b.ratio()) * c.v_ff - 2.0 * lambda * c.v_yf) / b.n;
}

TuningParameter contrast_lambda_star(const ContrastBlocks& c, const SampleBudget& b) {
    c.validate();
    b.validate();
    if (c.v_ff == 0.0) return {0.0, Warning::zero_prediction_variance};
    return {c.v_yf / ((1.0 + b.ratio()) * c.v_ff), Warning::none};
}

double contrast_optimal_variance(const ContrastBlocks& c, const SampleBudget& b) {
    c.validate();
    b.validate();
    if (c.v_ff == 0.0) return c.v_yy / b.n;
    return (c.v_yy - c.v_yf * c.v_yf / ((1.0 + b.ratio()) * c.v_ff)) / b.n;
}

}  // namespace ppipower
