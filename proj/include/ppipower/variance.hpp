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

#pragma once

#include "ppipower/calibration.hpp"
#include "ppipower/error.hpp"

namespace ppipower {

/// Labeled count n, unlabeled count N and the two-group allocation ratio.
/// N may be +infinity to evaluate the N >> n limit.
struct SampleBudget {
    double n = 1.0;
    double N = 1.0;
    double kappa = 1.0;

    void validate() const;
    double ratio() const { return n / N; }  ///< r = n / N (0 when N is infinite)
};

struct TwoGroupMoments {
    MomentSet a;
    MomentSet b;
    SampleBudget budget_a;
    SampleBudget budget_b;
};

enum class RiskMeasure { relative_risk, odds_ratio };

struct TwoByTwoSpec {
    double p0 = 0.0;  ///< control event probability
    double p1 = 0.0;  ///< treatment event probability
    double rho0 = 0.0;
    double rho1 = 0.0;
    double kappa = 1.0;  ///< n1 / n0
    RiskMeasure measure = RiskMeasure::relative_risk;

    void validate() const;
    /// log(p1/p0) or logit(p1) - logit(p0).
    double log_effect() const;
};

/// Contrast-level score variances (V_YY, V_ff, V_Yf) of a regression
/// estimating equation.
struct ContrastBlocks {
    double v_yy = 0.0;
    double v_ff = 0.0;
    double v_yf = 0.0;

    void validate() const;
};

/// Var(theta_lambda) = var_y/n + lambda^2 var_f (1/N + 1/n) - 2 lambda cov/n.
double ppi_pp_variance(const MomentSet& m, const SampleBudget& b, double lambda);

/// Vanilla PPI (lambda = 1): var_f/N + var_eps/n.
double ppi_variance(const MomentSet& m, const SampleBudget& b);

struct TuningParameter {
    double lambda = 0.0;
    Warning warning = Warning::none;
};

/// cov / ((1 + r) var_f); 0 with a warning when var_f == 0.
TuningParameter lambda_star(const MomentSet& m, const SampleBudget& b);

/// Variance at lambda_star: var_y/n - (cov^2/var_f) N / (n (n + N)).
double optimal_variance(const MomentSet& m, const SampleBudget& b);

/// Sum of the per-group optimal variances (independent groups, per-group
/// tuning parameters).
double two_sample_variance(const TwoGroupMoments& t);

/// One-sample optimal variance applied to the moments of the paired
/// differences (D, G) = (Y^A - Y^B, f^A - f^B).
double paired_variance(const MomentSet& diff, const SampleBudget& b);

/// Large-N delta-method variance of log RR-hat / log OR-hat at control
/// labeled count n0 (treatment count kappa * n0).
double log_rr_variance(const TwoByTwoSpec& s, double n0);
double log_or_variance(const TwoByTwoSpec& s, double n0);
/// Dispatches on s.measure.
double log_measure_variance(const TwoByTwoSpec& s, double n0);

/// (V_YY + lambda^2 (1 + r) V_ff - 2 lambda V_Yf) / n.
double contrast_variance(const ContrastBlocks& c, const SampleBudget& b, double lambda);

/// V_Yf / ((1 + r) V_ff); 0 with a warning when V_ff == 0.
TuningParameter contrast_lambda_star(const ContrastBlocks& c, const SampleBudget& b);

/// (V_YY - V_Yf^2 / ((1 + r) V_ff)) / n.
double contrast_optimal_variance(const ContrastBlocks& c, const SampleBudget& b);

}  // namespace ppipower
