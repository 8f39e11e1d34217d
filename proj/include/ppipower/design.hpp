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

namespace ppipower {

/// Test level, target power and effect for a two-sided Wald test of
/// H0: theta = theta0 against theta = theta0 + delta.
struct DesignInputs {
    double alpha = 0.05;
    double target_power = 0.8;
    double delta = 0.0;
    double theta0 = 0.0;

    /// Throws Error(invalid_argument) unless 0 < alpha < target_power < 1
    /// and delta, theta0 are finite.
    void validate() const;

    double z_alpha() const;  ///< z_{1-alpha/2}
    double z_beta() const;   ///< z_{target_power}

    DesignInputs with_delta(double d) const {
        DesignInputs copy = *this;
        copy.delta = d;
        return copy;
    }
};

/// Largest estimator variance compatible with the target power:
/// (delta / (z_{1-alpha/2} + z_{1-beta}))^2.
struct VarianceThreshold {
    double s2 = 0.0;
};

VarianceThreshold variance_threshold(const DesignInputs& d);

/// Two-sided Wald power at a given estimator variance, both tails included.
/// A zero variance with nonzero effect gives power 1.
double wald_power(double variance, double delta, double alpha);

}  // namespace ppipower
