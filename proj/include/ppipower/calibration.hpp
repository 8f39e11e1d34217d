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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ppipower/error.hpp"

namespace ppipower {

/// Second-order planning inputs: Var(Y), Var(f) and Cov(Y, f).
///
/// Every planning formula consumes the outcome/prediction relationship
/// through these three numbers. Construct through from_covariance() or one
/// of the calibrate_* functions so the Cauchy-Schwarz invariant is checked.
struct MomentSet {
    double var_y = 0.0;
    double var_f = 0.0;
    double cov_yf = 0.0;
    /// True when built from an MSE bound; the implied correlation is then a
    /// lower bound on the true one.
    bool conservative = false;

    /// Throws Error(invalid_argument) when an invariant fails. A relative
    /// slack of 1e-12 is allowed on cov^2 <= var_y * var_f.
    static MomentSet from_covariance(double var_y, double var_f, double cov_yf,
                                     bool conservative = false);

    double rho() const;      ///< cov / (sd_y sd_f), clamped to [-1, 1]; 0 if a variance is 0
    double rho2() const;     ///< rho()^2
    double var_eps() const;  ///< Var(Y - f), floored at 0
};

struct BinaryMetrics {
    double prevalence = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
};

/// Paired pilot observations (y_i, f_i) with optional group labels.
struct PilotSample {
    std::vector<double> y;
    std::vector<double> f;
    std::vector<std::string> group;  ///< empty, or one label per pair

    std::size_t size() const { return y.size(); }

    /// Pairs whose label equals `label`. Throws if the sample has no labels.
    PilotSample subset(std::string_view label) const;
};

/// Moments of (Y, f) for a binary outcome scored by a binary classifier,
/// obtained from the exact joint law of (Y, f).
MomentSet calibrate_binary(const BinaryMetrics& m);

/// Canonical moments for a continuous outcome with known R^2 = rho^2:
/// var_f = var_y and cov = var_y * sqrt(r2).
MomentSet calibrate_r2(double var_y, double r2);

/// Conservative moments from a reported MSE = Var(Y - f):
/// rho^2 = max(0, 1 - mse / var_y), flagged conservative.
MomentSet calibrate_mse(double var_y, double mse);

/// Unbiased (n - 1) sample moments. Throws Error(degenerate) naming the
/// column when y or f is constant.
MomentSet estimate_moments(const PilotSample& pilot);

struct LambdaEstimate {
    double value = 0.0;
    Warning warning = Warning::none;
};

struct LambdaClamp {
    double lower = 0.0;
    double upper = 1.0;
};

/// Plug-in tuning parameter cov(y, f) / ((1 + r) var(f)) from sample
/// moments. Unclamped unless `clamp` is given. A constant f yields 0 with a
/// zero_prediction_variance warning.
LambdaEstimate plugin_lambda(const PilotSample& pilot, double r,
                             std::optional<LambdaClamp> clamp = std::nullopt);

/// Same estimator on raw spans (length >= 2, y not constant).
LambdaEstimate plugin_lambda(std::span<const double> y, std::span<const double> f, double r);

/// Parses CSV text with header `y,f` or `y,f,group`. Errors carry the
/// offending 1-based line number.
PilotSample parse_pilot_csv(std::string_view text);

}  // namespace ppipower
