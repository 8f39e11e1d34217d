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
#include <cstring>
#include <string>
#include <vector>

#include <doctest.h>

#include "ppipower/ppipower.h"

namespace {

ppw_design design(double delta) {
    ppw_design d;
    d.alpha = 0.05;
    d.target_power = 0.8;
    d.delta = delta;
    return d;
}

ppw_moments r2_moments(double rho2) {
    ppw_moments m{};
    REQUIRE(ppw_calibrate_r2(1.0, rho2, &m) == PPW_OK);
    return m;
}

}  // namespace

TEST_CASE("status names and version") {
    CHECK(std::string(ppw_status_name(PPW_OK)) == "ok");
    CHECK(std::string(ppw_status_name(PPW_ERR_INFEASIBLE)) == "infeasible");
    CHECK(std::string(ppw_status_name(PPW_ERR_INTERNAL)) == "internal_error");
    CHECK(std::string(ppw_status_name(static_cast<ppw_status>(99))) == "unknown_status");
    CHECK(std::strlen(ppw_version()) > 0);
}

TEST_CASE("null arguments are rejected with a message") {
    CHECK(ppw_normal_cdf(0.0, nullptr) == PPW_ERR_INVALID_ARGUMENT);
    CHECK(std::string(ppw_last_error()).find("NULL") != std::string::npos);
    ppw_plan plan;
    CHECK(ppw_n_mean(nullptr, 100.0, nullptr, &plan) == PPW_ERR_INVALID_ARGUMENT);
    CHECK(std::isnan(ppw_moments_rho(nullptr)));
    ppw_pilot_destroy(nullptr);
    ppw_sim_config_destroy(nullptr);
    ppw_sim_result_destroy(nullptr);
}

TEST_CASE("normal helpers") {
    double v = 0;
    REQUIRE(ppw_normal_cdf(1.959963984540054, &v) == PPW_OK);
    CHECK(v == doctest::Approx(0.975).epsilon(1e-14));
    REQUIRE(ppw_normal_quantile(0.8, &v) == PPW_OK);
    CHECK(v == doctest::Approx(0.8416212335729143).epsilon(1e-13));
    CHECK(ppw_normal_quantile(1.5, &v) == PPW_ERR_DOMAIN);
    const ppw_design d = design(0.2);
    REQUIRE(ppw_variance_threshold(&d, &v) == PPW_OK);
    CHECK(v == doctest::Approx(0.04 / std::pow(1.959963984540054 + 0.8416212335729143, 2)).epsilon(1e-12));
}

TEST_CASE("one-sample plans") {
    const ppw_moments m = r2_moments(0.49);
    const ppw_design d = design(0.2);
    ppw_plan plan;
    REQUIRE(ppw_n_mean(&m, 5000.0, &d, &plan) == PPW_OK);
    CHECK(plan.n_star == 102);
    CHECK(plan.classical_n == 197);
    CHECK(plan.n_star_other == -1);
    CHECK(std::isnan(plan.lambda_star_other));
    CHECK(plan.pool_exhausted == 0);
    CHECK(plan.warning == PPW_WARN_NONE);
    CHECK(plan.analytic_power >= 0.8);

    double p = 0;
    REQUIRE(ppw_power_mean(&m, static_cast<double>(plan.n_star), 5000.0, &d, &p) == PPW_OK);
    CHECK(p == doctest::Approx(plan.analytic_power).epsilon(1e-14));

    REQUIRE(ppw_n_mean(&m, INFINITY, &d, &plan) == PPW_OK);
    CHECK(plan.n_star <= 102);

    ppw_plan vanilla;
    REQUIRE(ppw_n_mean_vanilla(&m, 5000.0, &d, &vanilla) == PPW_OK);
    CHECK(vanilla.n_star == 123);
    CHECK(ppw_n_mean_vanilla(&m, 50.0, &d, &vanilla) == PPW_ERR_INFEASIBLE);
    CHECK(ppw_last_error_minimal_unlabeled() > 50.0);
    CHECK(std::string(ppw_last_error()).find("N must exceed") != std::string::npos);

    int64_t n = 0;
    REQUIRE(ppw_n_classical(1.0, &d, &n) == PPW_OK);
    CHECK(n == 197);
}

TEST_CASE("two-sample, paired, 2x2 and regression plans") {
    const ppw_moments m = r2_moments(0.49);
    const ppw_design d = design(0.3);
    ppw_plan plan;
    REQUIRE(ppw_n_two_sample(&m, &m, 5000.0, 5000.0, 1.0, &d, &plan) == PPW_OK);
    CHECK(plan.n_star == 91);
    CHECK(plan.n_star_other == 91);
    CHECK(plan.classical_n == 175);

    REQUIRE(ppw_n_paired(&m, 5000.0, &d, &plan) == PPW_OK);
    CHECK(plan.n_star == 45);
    CHECK(plan.classical_n == 88);

    ppw_two_by_two t{0.2, 0.4, 0.0, 0.0, 1.0, PPW_RELATIVE_RISK};
    REQUIRE(ppw_n_two_by_two(&t, &d, &plan) == PPW_OK);
    CHECK(plan.n_star == 90);
    t.rho0 = 1.2;
    CHECK(ppw_n_two_by_two(&t, &d, &plan) == PPW_ERR_INVALID_ARGUMENT);

    const ppw_blocks b{2.0, 2.0, 1.4};
    REQUIRE(ppw_n_regression(&b, 500.0, &d, &plan) == PPW_OK);
    double p = 0;
    REQUIRE(ppw_power_regression(&b, static_cast<double>(plan.n_star), 500.0, &d, &p) == PPW_OK);
    CHECK(p >= 0.8);
    REQUIRE(ppw_power_regression(&b, static_cast<double>(plan.n_star - 1), 500.0, &d, &p) == PPW_OK);
    CHECK(p < 0.8);
}

TEST_CASE("binary calibration and variance") {
    const ppw_binary_metrics bm{0.3, 0.85, 0.85};
    ppw_moments m{};
    REQUIRE(ppw_calibrate_binary(&bm, &m) == PPW_OK);
    CHECK(ppw_moments_rho(&m) == doctest::Approx(0.66829228884772667).epsilon(1e-12));

    double lambda = 0, v_opt = 0, v_lambda = 0;
    ppw_warning w = PPW_WARN_NONE;
    REQUIRE(ppw_lambda_star(&m, 100.0, 1000.0, &lambda, &w) == PPW_OK);
    REQUIRE(ppw_optimal_variance(&m, 100.0, 1000.0, &v_opt) == PPW_OK);
    REQUIRE(ppw_ppi_pp_variance(&m, 100.0, 1000.0, lambda, &v_lambda) == PPW_OK);
    CHECK(v_opt == doctest::Approx(v_lambda).epsilon(1e-14));
    double v_one = 0, v_vanilla = 0;
    REQUIRE(ppw_ppi_pp_variance(&m, 100.0, 1000.0, 1.0, &v_one) == PPW_OK);
    REQUIRE(ppw_ppi_variance(&m, 100.0, 1000.0, &v_vanilla) == PPW_OK);
    CHECK(v_one == doctest::Approx(v_vanilla).epsilon(1e-12));
    CHECK(ppw_ppi_pp_variance(&m, 0.0, 1000.0, 0.5, &v_one) != PPW_OK);
}

TEST_CASE("pilot handles") {
    const std::string csv = "y,f,group\n1,0.9,a\n0,0.2,a\n1,0.7,a\n0.5,0.4,b\n0.1,0.3,b\n0.9,0.8,b\n";
    ppw_pilot* pilot = nullptr;
    REQUIRE(ppw_pilot_parse_csv(csv.data(), csv.size(), &pilot) == PPW_OK);
    CHECK(ppw_pilot_size(pilot) == 6u);
    ppw_moments all{}, a{};
    REQUIRE(ppw_pilot_moments(pilot, nullptr, &all) == PPW_OK);
    REQUIRE(ppw_pilot_moments(pilot, "a", &a) == PPW_OK);
    CHECK(a.var_y == doctest::Approx(1.0 / 3.0));
    CHECK(all.var_y != a.var_y);
    CHECK(ppw_pilot_moments(pilot, "zzz", &a) != PPW_OK);
    double lambda = 0;
    ppw_warning w = PPW_WARN_NONE;
    REQUIRE(ppw_pilot_lambda(pilot, nullptr, 0.1, 1, &lambda, &w) == PPW_OK);
    CHECK(lambda >= 0.0);
    CHECK(lambda <= 1.0);
    ppw_pilot_destroy(pilot);

    const std::string bad = "y,f\n1,0.5\n2,oops\n";
    pilot = nullptr;
    CHECK(ppw_pilot_parse_csv(bad.data(), bad.size(), &pilot) == PPW_ERR_PARSE);
    CHECK(pilot == nullptr);
    CHECK(std::string(ppw_last_error()).find("line 3") != std::string::npos);
}

TEST_CASE("simulation through handles") {
    const std::string text = "n = 30\nN = 200\nrho = 0.5, 0.9\nreplicates = 50\n";
    ppw_sim_config* cfg = nullptr;
    REQUIRE(ppw_sim_config_parse(text.data(), text.size(), &cfg) == PPW_OK);
    CHECK(ppw_sim_config_set_replicates(cfg, 0) == PPW_ERR_CONFIG);
    REQUIRE(ppw_sim_config_set_seed(cfg, 99) == PPW_OK);
    REQUIRE(ppw_sim_config_set_threads(cfg, 2) == PPW_OK);
    REQUIRE(ppw_sim_config_set_replicates(cfg, 80) == PPW_OK);

    ppw_sim_result* res = nullptr;
    REQUIRE(ppw_simulate(cfg, &res) == PPW_OK);
    REQUIRE(ppw_sim_result_rows(res) == 2u);
    ppw_sim_row row;
    REQUIRE(ppw_sim_result_row(res, 1, &row) == PPW_OK);
    CHECK(std::string(row.design) == "one_sample_cont");
    CHECK(std::string(row.lambda_mode) == "oracle");
    CHECK(row.n == 30);
    CHECK(row.n_other == -1);
    CHECK(row.rho_or_accuracy == doctest::Approx(0.9));
    CHECK(std::isnan(row.type1));
    CHECK(std::isnan(row.rho_plan));
    CHECK(ppw_sim_result_row(res, 2, &row) == PPW_ERR_INVALID_ARGUMENT);

    size_t needed = 0;
    CHECK(ppw_sim_result_csv(res, nullptr, 0, &needed) == PPW_ERR_INVALID_ARGUMENT);
    REQUIRE(needed > 1);
    std::vector<char> buf(needed);
    CHECK(ppw_sim_result_csv(res, buf.data(), needed - 1, &needed) == PPW_ERR_INVALID_ARGUMENT);
    REQUIRE(ppw_sim_result_csv(res, buf.data(), buf.size(), &needed) == PPW_OK);
    const std::string first(buf.data());
    CHECK(first.rfind("design,n,N,", 0) == 0);

    ppw_sim_result* again = nullptr;
    REQUIRE(ppw_simulate(cfg, &again) == PPW_OK);
    std::vector<char> buf2(needed);
    REQUIRE(ppw_sim_result_csv(again, buf2.data(), buf2.size(), &needed) == PPW_OK);
    CHECK(first == std::string(buf2.data()));

    ppw_sim_result_destroy(again);
    ppw_sim_result_destroy(res);
    ppw_sim_config_destroy(cfg);

    cfg = nullptr;
    CHECK(ppw_sim_config_load("/nonexistent.cfg", &cfg) == PPW_ERR_CONFIG);
    CHECK(cfg == nullptr);
    const std::string bad = "bogus = 1\n";
    CHECK(ppw_sim_config_parse(bad.data(), bad.size(), &cfg) == PPW_ERR_CONFIG);
    CHECK(std::string(ppw_last_error()) == "line 1: bogus: unknown key");
}
