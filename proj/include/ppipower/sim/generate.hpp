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

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ppipower/calibration.hpp"
#include "ppipower/sim/rng.hpp"
#include "ppipower/variance.hpp"

namespace ppipower::sim {

enum class Design {
    one_sample_cont,
    one_sample_bin,
    two_sample_cont,
    two_sample_bin,
    paired_cont,
    paired_bin,
    two_by_two_rr,
    two_by_two_or,
    ols_contrast,
    logistic_contrast,
};

enum class OutcomeDist { gaussian, t5, lognormal, bernoulli };

/// How each replicate picks the tuning weight. `classical` fixes it at 0
/// (labeled mean only) and `vanilla` at 1 (untuned PPI).
enum class LambdaMode { oracle, plugin, crossfit, classical, vanilla };

std::string_view to_string(Design d);
std::string_view to_string(OutcomeDist d);
std::string_view to_string(LambdaMode m);
std::optional<Design> parse_design(std::string_view s);
std::optional<OutcomeDist> parse_outcome_dist(std::string_view s);
std::optional<LambdaMode> parse_lambda_mode(std::string_view s);

bool is_binary(Design d);
bool is_two_group(Design d);
bool is_regression(Design d);

/// One simulation cell: a data-generating process plus the test applied to it.
///
/// Group A doubles as the 2x2 control group; n_other/N_other of 0 mean
/// "same as group A". Continuous designs use `rho`; binary designs use
/// `accuracy` as both sensitivity and specificity.
struct CellSpec {
    Design design = Design::one_sample_cont;
    OutcomeDist dist = OutcomeDist::gaussian;
    int n = 100;
    int N = 500;
    int n_other = 0;
    int N_other = 0;
    double rho = 0.7;
    double accuracy = 0.85;
    double delta = 0.2;    ///< mean shift; logistic slope; unused by 2x2 cells
    double p_base = 0.3;   ///< binary base rate, 2x2 control probability
    double p_treat = 0.4;  ///< 2x2 treatment probability under the alternative
    double within_pair_corr = 0.3;
    double alpha = 0.05;
    LambdaMode lambda_mode = LambdaMode::oracle;
    int folds = 2;
    int replicates = 1000;
    double target_power = 0.8;  ///< recorded for inversion experiments
    bool null_effect = false;   ///< replace the alternative by the null

    int group_b_n() const { return n_other > 0 ? n_other : n; }
    int group_b_N() const { return N_other > 0 ? N_other : N; }
    void validate() const;
};

struct MeanSample {
    std::vector<double> y;
    std::vector<double> f;
    std::vector<double> f_unlabeled;
};

struct TwoGroupSample {
    MeanSample a;
    MeanSample b;
};

struct RegressionSample {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    Eigen::VectorXd f;
    Eigen::MatrixXd x_unlabeled;
    Eigen::VectorXd f_unlabeled;
};

using Dataset = std::variant<MeanSample, TwoGroupSample, RegressionSample>;

/// Population quantities the analytic comparator needs for a cell.
struct CellTruth {
    MomentSet a;                ///< group A (or the whole sample)
    MomentSet b;                ///< group B / treatment, two-group designs only
    ContrastBlocks blocks;      ///< regression designs only
    TwoByTwoSpec table;         ///< 2x2 designs only
    double effect = 0.0;        ///< tested effect on the test's scale
    double latent_corr = 0.0;   ///< paired binary only
};

/// Draws one labeled block (n pairs) and one independent unlabeled block
/// (N predictions) from the cell's data-generating process.
Dataset generate(const CellSpec& cell, Rng& rng);

/// Same draw, reusing the precomputed latent correlation in `truth` so
/// paired binary replicates skip the root solve.
Dataset generate(const CellSpec& cell, const CellTruth& truth, Rng& rng);

/// Bivariate standard normal CDF P(Z1 <= a, Z2 <= b) with correlation r.
double bivariate_normal_cdf(double a, double b, double r);

/// Latent normal correlation whose thresholded indicators at prevalences
/// (p_a, p_b) have Pearson correlation `target`.
double latent_correlation(double p_a, double p_b, double target);

/// Exact moments of (D, G) = (Y^A - Y^B, f^A - f^B) for the paired binary
/// process: latent-normal outcomes, classifier noise independent given Y.
MomentSet paired_binary_moments(double p_a, double p_b, double latent_corr, double accuracy);

/// Truth for everything except logistic blocks, which need a reference sample
/// (see glm_reference_blocks) and are filled in by the caller.
CellTruth cell_truth(const CellSpec& cell);

/// Contrast vector used by both regression designs: beta_1 - beta_2.
Eigen::Vector2d contrast_vector();

}  // namespace ppipower::sim
