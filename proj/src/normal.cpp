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

#include "ppipower/normal.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "ppipower/error.hpp"

namespace ppipower {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

double upper_tail(double z) { return 0.5 * std::erfc(z * kInvSqrt2); }

double density(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

// Acklam's rational approximation, relative error below 1.15e-9.
double acklam(double q) {
    static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                             -2.759285104469687e+02, 1.383577518672690e+02,
                                             -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                             -1.556989798598866e+02, 6.680131188771972e+01,
                                             -1.328068155288572e+01};
    static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                             -2.400758277161838e+00, -2.549732539343734e+00,
                                             4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                             2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double low = 0.02425;

    if (q < low) {
        const double t = std::sqrt(-2.0 * std::log(q));
        return (((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]) /
               ((((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0);
    }
    if (q > 1.0 - low) {
        const double t = std::sqrt(-2.0 * std::log1p(-q));
        return -(((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]) /
               ((((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0);
    }
    const double u = q - 0.5;
    const double s = u * u;
    return (((((a[0] * s + a[1]) * s + a[2]) * s + a[3]) * s + a[4]) * s + a[5]) * u /
           (((((b[0] * s + b[1]) * s + b[2]) * s + b[3]) * s + b[4]) * s + 1.0);
}

}  // namespace

double normal_cdf(double z) {
    if (std::isnan(z)) throw Error(ErrorCode::domain, "normal_cdf: argument is NaN");
    return 0.5 * std::erfc(-z * kInvSqrt2);
}

double normal_quantile(double q) {
    if (!(q > 0.0 && q < 1.0)) {
        throw Error(ErrorCode::domain,
                    "normal_quantile: probability must lie in (0, 1), got " + std::to_string(q));
    }
    if (q == 0.5) return 0.0;
    double x = acklam(q);

    // One Newton step. The residual is taken from whichever tail keeps it accurate.
    const double residual = x < 0.0 ? normal_cdf(x) - q : (1.0 - q) - upper_tail(x);
    const double pdf = density(x);
    if (pdf > 0.0) x -= residual / pdf;
    return x;
}

}  // namespace ppipower
