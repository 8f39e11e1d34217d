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


#include <cmath>
#include <limits>

#include <doctest.h>

#include "ppipower/variance.hpp"
#include "test_util.hpp"

using namespace ppipower;
using ppipower::testing::error_code;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Direct expansion of Var(mean(Y) + lambda (mean(f~) - mean(f))) for
// independent labeled and unlabeled samples.
double expanded_variance(const MomentSet& m, double n, double N, double lambda) {
    const double labeled = (m.var_y - 2.0 * lambda * m.cov_yf + lambda * lambda * m.var_f) / n;
    const double pool = std::isinf(N) ? 0.0 : lambda * lambda * m.var_f / N;
    return labeled + pool;
}

}  // namespace

TEST_CASE("PPI++ variance equals the direct expansion") {
    const MomentSet m = MomentSet::from_covariance(2.0, 1.5, 1.1);
    for (double lambda : {-0.5, 0.0, 0.3, 0.8, 1.0, 1.7}) {
        for (double N : {50.0, 1000.0, kInf}) {
            CHECK(ppi_pp_variance(m, {40.0, N}, lambda) ==
                  doctest::Approx(expanded_variance(m, 40.0, N, lambda)).epsilon(1e-14));
        }
    }
}

TEST_CASE("lambda star and the optimal variance") {
    const MomentSet m = calibrate_r2(1.0, 0.49);
    const SampleBudget b{102.0, 5000.0};
    const TuningParameter t = lambda_star(m, b);
    CHECK(t.lambda == doctest::Approx(0.7 / (1.0 + 102.0 / 5000.0)).epsilon(1e-14));
    CHECK(t.warning == Warning::none);
    CHECK(optimal_variance(m, b) == doctest::Approx(ppi_pp_variance(m, b, t.lambda)).epsilon(1e-13));
    // Closed form var_y/n - cov^2/var_f * N / (n (n + N)).
    CHECK(optimal_variance(m, b) ==
          doctest::Approx(1.0 / 102.0 - 0.49 * 5000.0 / (102.0 * 5102.0)).epsilon(1e-14));
}

TEST_CASE("infinite pool limits") {
    const MomentSet m = calibrate_r2(1.0, 0.64);
    const SampleBudget b{50.0, kInf};
    CHECK(b.ratio() == 0.0);
    CHECK(lambda_star(m, b).lambda == doctest::Approx(0.8));
    CHECK(optimal_variance(m, b) == doctest::Approx(0.36 / 50.0).epsilon(1e-14));
    CHECK(ppi_variance(m, b) == doctest::Approx(m.var_eps() / 50.0).epsilon(1e-14));
}

TEST_CASE("zero prediction variance falls back to the classical estimator") {
    const MomentSet m = MomentSet::from_covariance(1.0, 0.0, 0.0);
    const TuningParameter t = lambda_star(m, {10.0, 100.0});
    CHECK(t.lambda == 0.0);
    CHECK(t.warning == Warning::zero_prediction_variance);
    CHECK(optimal_variance(m, {10.0, 100.0}) == doctest::Approx(0.1));
}

TEST_CASE("two-sample and paired variances compose the one-sample result") {
    const MomentSet a = calibrate_r2(1.0, 0.49), b = calibrate_r2(2.0, 0.25);
    const TwoGroupMoments t{a, b, {30.0, 300.0}, {45.0, 200.0}};
    CHECK(two_sample_variance(t) == doctest::Approx(optimal_variance(a, {30.0, 300.0}) +
                                                    optimal_variance(b, {45.0, 200.0}))
                                        .epsilon(1e-14));
    CHECK(paired_variance(a, {30.0, 300.0}) == optimal_variance(a, {30.0, 300.0}));
}

TEST_CASE("2x2 delta-method variances") {
    TwoByTwoSpec s{0.2, 0.4, 0.0, 0.0, 1.0, RiskMeasure::relative_risk};
    CHECK(log_rr_variance(s, 100.0) == doctest::Approx((0.8 / 0.2 + 0.6 / 0.4) / 100.0).epsilon(1e-14));
    CHECK(log_or_variance(s, 100.0) ==
          doctest::Approx((1.0 / (0.2 * 0.8) + 1.0 / (0.4 * 0.6)) / 100.0).epsilon(1e-14));
    s.rho0 = 0.5;
    s.rho1 = 0.6;
    s.kappa = 2.0;
    CHECK(log_rr_variance(s, 100.0) ==
          doctest::Approx((0.75 * 0.8 / 0.2 + 0.64 * 0.6 / 0.4 / 2.0) / 100.0).epsilon(1e-14));
    CHECK(s.log_effect() == doctest::Approx(std::log(2.0)));
    s.measure = RiskMeasure::odds_ratio;
    CHECK(s.log_effect() == doctest::Approx(std::log((0.4 / 0.6) / (0.2 / 0.8))));
    CHECK(log_measure_variance(s, 50.0) == log_or_variance(s, 50.0));
    s.p0 = 1.0;
    CHECK(error_code([&] { s.validate(); }) == ErrorCode::degenerate);
    s.p0 = 0.2;
    s.rho1 = 1.2;
    CHECK(error_code([&] { s.validate(); }) == ErrorCode::invalid_argument);
}

TEST_CASE("contrast variance mirrors the mean formula") {
    const ContrastBlocks c{2.0, 2.0, 1.4};
    const SampleBudget b{40.0, 500.0};
    const double r = b.ratio();
    CHECK(contrast_variance(c, b, 0.6) ==
          doctest::Approx((2.0 + 0.36 * (1.0 + r) * 2.0 - 1.2 * 1.4) / 40.0).epsilon(1e-14));
    CHECK(contrast_lambda_star(c, b).lambda == doctest::Approx(1.4 / ((1.0 + r) * 2.0)).epsilon(1e-14));
    CHECK(contrast_optimal_variance(c, b) ==
          doctest::Approx(contrast_variance(c, b, contrast_lambda_star(c, b).lambda)).epsilon(1e-13));
    CHECK(error_code([] { ContrastBlocks{1.0, 1.0, 2.0}.validate(); }) == ErrorCode::invalid_argument);
}

TEST_CASE("budget validation") {
    CHECK(error_code([] { SampleBudget{0.0, 10.0}.validate(); }) == ErrorCode::invalid_argument);
    CHECK(error_code([] { SampleBudget{5.0, 0.0}.validate(); }) == ErrorCode::invalid_argument);
    CHECK_FALSE(error_code([] { SampleBudget{5.0, kInf}.validate(); }));
}
