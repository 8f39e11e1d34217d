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


#include <array>
#include <cmath>
#include <random>
#include <string>

#include <doctest.h>

#include "ppipower/calibration.hpp"
#include "test_util.hpp"

using namespace ppipower;
using ppipower::testing::error_code;

namespace {

struct Joint {
    double var_y, var_f, cov;
};

// Enumerates the four cells of the (Y, f) joint law.
Joint enumerate_binary(double p, double se, double sp) {
    const std::array<std::array<double, 3>, 4> cells = {{
        {1, 1, p * se},
        {1, 0, p * (1 - se)},
        {0, 1, (1 - p) * (1 - sp)},
        {0, 0, (1 - p) * sp},
    }};
    double ey = 0, ef = 0, eyy = 0, eff = 0, eyf = 0;
    for (const auto& c : cells) {
        ey += c[2] * c[0];
        ef += c[2] * c[1];
        eyy += c[2] * c[0] * c[0];
        eff += c[2] * c[1] * c[1];
        eyf += c[2] * c[0] * c[1];
    }
    return {eyy - ey * ey, eff - ef * ef, eyf - ey * ef};
}

}  // namespace

TEST_CASE("binary calibration equals the enumerated joint law") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> prob(0.01, 0.99), acc(0.5, 1.0);
    for (int i = 0; i < 500; ++i) {
        const double p = prob(gen), se = acc(gen), sp = acc(gen);
        const MomentSet m = calibrate_binary({p, se, sp});
        const Joint j = enumerate_binary(p, se, sp);
        CHECK(m.var_y == doctest::Approx(j.var_y).epsilon(1e-13));
        CHECK(m.var_f == doctest::Approx(j.var_f).epsilon(1e-13));
        CHECK(m.cov_yf == doctest::Approx(j.cov).epsilon(1e-12));
        CHECK_FALSE(m.conservative);
    }
}

TEST_CASE("binary calibration reference values") {
    const MomentSet m = calibrate_binary({0.3, 0.85, 0.85});
    CHECK(m.var_y == doctest::Approx(0.21).epsilon(1e-15));
    CHECK(m.var_f == doctest::Approx(0.2304).epsilon(1e-14));
    CHECK(m.cov_yf == doctest::Approx(0.147).epsilon(1e-14));
    CHECK(m.rho() == doctest::Approx(0.66829228884772667).epsilon(1e-14));
    CHECK(calibrate_binary({0.2, 0.9, 0.9}).rho2() == doctest::Approx(0.5322245322245).epsilon(1e-12));
}

TEST_CASE("a perfect classifier reproduces the outcome") {
    const MomentSet m = calibrate_binary({0.4, 1.0, 1.0});
    CHECK(m.var_f == doctest::Approx(m.var_y).epsilon(1e-15));
    CHECK(m.cov_yf == doctest::Approx(m.var_y).epsilon(1e-15));
    CHECK(m.rho() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("binary calibration domain errors") {
    CHECK(error_code([] { calibrate_binary({0.0, 0.9, 0.9}); }) == ErrorCode::degenerate);
    CHECK(error_code([] { calibrate_binary({0.3, 1.1, 0.9}); }) == ErrorCode::invalid_argument);
    CHECK(error_code([] { calibrate_binary({-0.1, 0.9, 0.9}); }) == ErrorCode::invalid_argument);
}

TEST_CASE("R^2 and MSE calibration") {
    const MomentSet r = calibrate_r2(2.0, 0.49);
    CHECK(r.var_f == 2.0);
    CHECK(r.cov_yf == doctest::Approx(1.4).epsilon(1e-15));
    CHECK(r.rho2() == doctest::Approx(0.49).epsilon(1e-14));

    const MomentSet m = calibrate_mse(2.0, 0.5);
    CHECK(m.conservative);
    CHECK(m.rho2() == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(calibrate_mse(1.0, 3.0).rho2() == 0.0);
    CHECK(error_code([] { calibrate_r2(1.0, 1.5); }) == ErrorCode::invalid_argument);
    CHECK(error_code([] { calibrate_mse(0.0, 0.5); }) == ErrorCode::invalid_argument);
}

TEST_CASE("moment invariants") {
    CHECK(error_code([] { MomentSet::from_covariance(1.0, 1.0, 1.1); }) == ErrorCode::invalid_argument);
    CHECK(error_code([] { MomentSet::from_covariance(-1.0, 1.0, 0.0); }) == ErrorCode::invalid_argument);
    CHECK_FALSE(error_code([] { MomentSet::from_covariance(1.0, 1.0, 1.0 + 1e-14); }));
    const MomentSet m = MomentSet::from_covariance(4.0, 1.0, 1.0);
    CHECK(m.rho() == doctest::Approx(0.5));
    CHECK(m.var_eps() == doctest::Approx(3.0));
    CHECK(MomentSet::from_covariance(1.0, 0.0, 0.0).rho() == 0.0);
}

TEST_CASE("pilot moments use the unbiased two-pass estimator") {
    const PilotSample p = parse_pilot_csv("y,f\n1,1.2\n2,1.9\n3,3.3\n4,3.8\n");
    REQUIRE(p.size() == 4);
    const MomentSet m = estimate_moments(p);
    // Hand-computed: ybar = 2.5, fbar = 2.55.
    CHECK(m.var_y == doctest::Approx(5.0 / 3.0).epsilon(1e-14));
    CHECK(m.var_f == doctest::Approx((1.35 * 1.35 + 0.65 * 0.65 + 0.75 * 0.75 + 1.25 * 1.25) / 3.0).epsilon(1e-14));
    CHECK(m.cov_yf == doctest::Approx((1.5 * 1.35 + 0.5 * 0.65 + 0.5 * 0.75 + 1.5 * 1.25) / 3.0).epsilon(1e-14));
}

TEST_CASE("pilot CSV with groups") {
    const PilotSample p = parse_pilot_csv("y,f,group\n1,1,a\n2,2.5,a\n3,2,b\n5,4,b\n4,4,a\n");
    CHECK(p.size() == 5);
    const PilotSample b = p.subset("b");
    CHECK(b.size() == 2);
    CHECK(b.y[1] == 5.0);
    CHECK(p.subset("c").size() == 0);
}

TEST_CASE("pilot CSV errors carry line numbers") {
    auto message = [](const char* text) {
        try {
            parse_pilot_csv(text);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::parse);
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK(message("y,f\n1,2\n3,x\n").find("line 3") != std::string::npos);
    CHECK(message("y,f\n1,2,3\n").find("line 2") != std::string::npos);
    CHECK(message("").find("header") != std::string::npos);
    CHECK(error_code([] { parse_pilot_csv("y,f\n1,2\n").subset("a"); }) == ErrorCode::invalid_argument);
}

TEST_CASE("constant pilot columns are degenerate") {
    const PilotSample p = parse_pilot_csv("y,f\n1,2\n2,2\n3,2\n");
    CHECK(error_code([&] { estimate_moments(p); }) == ErrorCode::degenerate);
    const LambdaEstimate l = plugin_lambda(p, 0.1);
    CHECK(l.value == 0.0);
    CHECK(l.warning == Warning::zero_prediction_variance);
}

TEST_CASE("plug-in lambda from sample moments") {
    const PilotSample p = parse_pilot_csv("y,f\n1,1.2\n2,1.9\n3,3.3\n4,3.8\n");
    const MomentSet m = estimate_moments(p);
    CHECK(plugin_lambda(p, 0.25).value == doctest::Approx(m.cov_yf / (1.25 * m.var_f)).epsilon(1e-14));
    const double raw = plugin_lambda(p, 0.0).value;
    CHECK(raw > 1.0);
    CHECK(plugin_lambda(p, 0.0, LambdaClamp{}).value == 1.0);
}
