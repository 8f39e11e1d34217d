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

#include <cstdint>
#include <optional>

#include "ppipower/calibration.hpp"
#include "ppipower/design.hpp"
#include "ppipower/variance.hpp"

namespace ppipower {

/// Outcome of a labeled-sample-size inversion.
///
/// Counts are per group for two-group designs: `n_star` is group A (or the
/// control group of a 2x2 table) and `n_star_other` group B (treatment).
/// Inversions use the one-term planning criterion variance(n) <= S^2;
/// `analytic_power` is always the full two-tailed Wald power at `n_star`,
/// so it can sit slightly above the target.
struct PlanResult {
    std::int64_t n_star = 0;
    std::optional<std::int64_t> n_star_other;
    double n_exact = 0.0;  ///< real-valued root before ceiling
    double analytic_power = 0.0;
    double variance = 0.0;  ///< estimator variance at n_star
    /// Oracle tuning parameter at n_star (group A for two-group designs).
    /// Empty for 2x2 plans, which are specified through correlations only.
    std::optional<double> lambda_star;
    std::optional<double> lambda_star_other;
    std::int64_t classical_n = 0;
    std::optional<std::int64_t> classical_n_other;
    double reduction = 0.0;  ///< 1 - labels / classical labels
    bool pool_exhausted = false;
    Warning warning = Warning::none;
};

/// Power of the labeled-only Wald test with n observations.
double classical_power(double n, double var_y, const DesignInputs& d);

/// ceil(var_y / S^2). Throws Error(unattainable) when delta == 0.
std::int64_t classical_n(double var_y, const DesignInputs& d);

/// Wald power at the optimal PPI++ variance.
double ppi_pp_power(const MomentSet& m, const SampleBudget& b, const DesignInputs& d);

/// Wald power of vanilla PPI (lambda = 1).
double vanilla_ppi_power(const MomentSet& m, const SampleBudget& b, const DesignInputs& d);

/// Smallest n with optimal_variance(n, N) <= S^2, floored at 1.
/// pool_exhausted is set when n_star > N.
PlanResult ppi_pp_n(const MomentSet& m, double N, const DesignInputs& d);

/// Smallest n with var_f/N + var_eps/n <= S^2. Throws Error(infeasible)
/// carrying the minimal workable N when S^2 <= var_f / N.
PlanResult vanilla_ppi_n(const MomentSet& m, double N, const DesignInputs& d);

/// Approximate n_PPI / n_classical for N >> n: 1 - rho^2.
double rule_of_thumb(double rho2);

struct Allocation {
    double kappa = 1.0;  ///< n_B / n_A, applied to the labeled counts
};

/// Power for two independent groups with n_A = n and n_B = kappa * n.
double two_sample_power(const MomentSet& a, const MomentSet& b, double n, double N_a, double N_b,
                        const DesignInputs& d, Allocation alloc = {});

/// Per-group labeled counts for the difference of two PPI++ means. Solves
/// the exact finite-N summed variance for n_A by bisection; n_B = ceil(kappa * n_A)
/// with the ratio applied before ceiling.
PlanResult two_sample_n(const MomentSet& a, const MomentSet& b, double N_a, double N_b,
                        const DesignInputs& d, Allocation alloc = {});

/// Identical to ppi_pp_n on the moments of the paired differences.
PlanResult paired_n(const MomentSet& diff, double N, const DesignInputs& d);

/// Wald power of the log-RR / log-OR test at control count n0.
double two_by_two_power(const TwoByTwoSpec& s, double n0, double alpha);

/// Large-N control/treatment counts for the log-RR or log-OR Wald test.
/// The effect is implied by (p0, p1); d.delta is ignored.
PlanResult two_by_two_n(const TwoByTwoSpec& s, const DesignInputs& d);

/// Wald power of a regression contrast at the oracle tuning parameter.
double regression_contrast_power(const ContrastBlocks& c, const SampleBudget& b,
                                 const DesignInputs& d);

/// Smallest n with contrast_optimal_variance(n, N) <= S^2. N may be infinite.
PlanResult regression_contrast_n(const ContrastBlocks& c, double N, const DesignInputs& d);

}  // namespace ppipower
