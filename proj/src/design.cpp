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

#include "ppipower/design.hpp"

#include <cmath>

#include "ppipower/error.hpp"
#include "ppipower/normal.hpp"

namespace ppipower {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::domain: return "domain_error";
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::degenerate: return "degenerate";
        case ErrorCode::unattainable: return "unattainable_power";
        case ErrorCode::infeasible: return "infeasible";
        case ErrorCode::singular: return "singular_system";
        case ErrorCode::config: return "config_error";
        case ErrorCode::parse: return "parse_error";
    }
    return "unknown";
}

void DesignInputs::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorCode::invalid_argument, "alpha must lie in (0, 1)");
    }
    if (!(target_power > 0.0 && target_power < 1.0)) {
        throw Error(ErrorCode::invalid_argument, "target power must lie in (0, 1)");
    }
    if (!(target_power > alpha)) {
        throw Error(ErrorCode::invalid_argument, "target power must exceed alpha");
    }
    if (!std::isfinite(delta) || !std::isfinite(theta0)) {
        throw Error(ErrorCode::invalid_argument, "effect size and null value must be finite");
    }
}

double DesignInputs::z_alpha() const { return normal_quantile(1.0 - alpha / 2.0); }

double DesignInputs::z_beta() const { return normal_quantile(target_power); }

VarianceThreshold variance_threshold(const DesignInputs& d) {
    d.validate();
    const double ratio = d.delta / (d.z_alpha() + d.z_beta());
    return {ratio * ratio};
}

double wald_power(double variance, double delta, double alpha) {
    if (!(variance >= 0.0)) {
        throw Error(ErrorCode::invalid_argument, "variance must be nonnegative");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorCode::invalid_argument, "alpha must lie in (0, 1)");
    }
    const double z = normal_quantile(1.0 - alpha / 2.0);
    if (delta == 0.0) return 2.0 * normal_cdf(-z);
    if (variance == 0.0) return 1.0;
    const double shift = std::abs(delta) / std::sqrt(variance);
    return normal_cdf(-z + shift) + normal_cdf(-z - shift);
}

}  // namespace ppipower
