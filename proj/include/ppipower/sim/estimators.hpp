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

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ppipower/sim/generate.hpp"
#include "ppipower/variance.hpp"

namespace ppipower::sim {

/// Rectified mean estimate and its plug-in variance for a fixed lambda.
struct MeanFit {
    double estimate = 0.0;
    double variance = 0.0;
};

MeanFit ppi_mean(const MeanSample& s, double lambda);

struct WaldOutcome {
    bool reject = false;
    bool degenerate = false;  ///< nonpositive or non-finite variance: never rejects
    double z = 0.0;
};

WaldOutcome wald_test(double estimate, double variance, double theta0, double alpha);

enum class Link { identity, logit };

/// Solves the lambda-rectified linear estimating equation in closed form.
/// Throws ErrorCode::singular when the weighted Gram matrix is rank deficient.
Eigen::VectorXd rectified_ols_solve(const RegressionSample& s, double lambda);

struct LogisticFit {
    Eigen::VectorXd beta;
    bool converged = false;
    int iterations = 0;
};

/// Damped Newton on the rectified logistic score, started at zero.
LogisticFit rectified_logistic_solve(const RegressionSample& s, double lambda, int max_iter = 50,
                                     double tol = 1e-8);

/// Sandwich standard error of a' beta for the rectified estimator at `beta`.
double sandwich_se(const RegressionSample& s, Link link, const Eigen::VectorXd& beta, double lambda,
                   const Eigen::VectorXd& a);

/// Contrast blocks from fully observed rows (x, y, f) evaluated at `beta`:
/// J = E[w x x'], V_YY = a'J^-1 Cov(x(y - mu)) J^-1 a, and so on.
ContrastBlocks score_blocks(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& f, Link link, const Eigen::VectorXd& beta,
                            const Eigen::VectorXd& a);

/// Population contrast blocks approximated from one reference sample of M
/// fully observed rows drawn from a regression cell at its true coefficients.
ContrastBlocks glm_reference_blocks(const CellSpec& cell, int M, Rng& rng);

/// Fold label per index: a shuffled permutation dealt round-robin into K folds.
std::vector<int> make_folds(std::size_t n, int K, Rng& rng);

/// Produces out-of-fold (outcome-side, prediction-side) score pairs for the
/// `test` indices using only the `train` indices.
using FoldScorer = std::function<void(const std::vector<std::size_t>& train,
                                      const std::vector<std::size_t>& test,
                                      std::vector<double>& u, std::vector<double>& v)>;

/// Cross-fitted tuning parameter: assembles out-of-fold pairs, then applies
/// Cov(u, v) / ((1 + r) Var(v)).
double crossfit_lambda(std::size_t n, int K, double r, Rng& rng, const FoldScorer& scorer);

/// Mean designs: the fold predictor is the supplied prediction itself.
double crossfit_lambda(std::span<const double> y, std::span<const double> f, int K, double r,
                       Rng& rng);

/// Regression designs: each fold fits a preliminary coefficient with
/// lambda = 1 on the other folds plus the unlabeled block, then scores the
/// held-out rows projected onto the contrast through J^-1 a.
double regression_crossfit_lambda(const RegressionSample& s, Link link, int K,
                                  const Eigen::VectorXd& a, Rng& rng);

/// Same scores without sample splitting: one preliminary fit on all rows.
double regression_plugin_lambda(const RegressionSample& s, Link link, const Eigen::VectorXd& a);

}  // namespace ppipower::sim
