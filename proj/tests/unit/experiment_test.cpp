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


#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include <doctest.h>

#include "ppipower/power.hpp"
#include "ppipower/sim/experiment.hpp"

using namespace ppipower;
using namespace ppipower::sim;

namespace {

RunOptions quick(int threads = 1) {
    RunOptions o;
    o.seed = 3;
    o.threads = threads;
    return o;
}

SimCell cell_of(const CellSpec& c) {
    SimCell s;
    s.spec = c;
    return s;
}

}  // namespace

TEST_CASE("grid expansion covers the full cross product") {
    const auto cells = expand_cells(SimConfig::parse(""));
    CHECK(cells.size() == 30u);
    std::map<std::tuple<int, int, double>, int> seen;
    for (const SimCell& c : cells) ++seen[{c.spec.n, c.spec.N, c.spec.rho}];
    CHECK(seen.size() == 30u);

    const auto binary = expand_cells(SimConfig::parse("design = one_sample_bin\nN = 500\n"));
    CHECK(binary.size() == 15u);
    CHECK(binary.front().spec.accuracy == doctest::Approx(0.70));
}

TEST_CASE("inversion cells sit at the planned n") {
    const auto cells = expand_cells(SimConfig::parse(
        "experiment = inversion_check\nN = 500\nrho = 0.5, 0.9\ntarget_power = 0.6, 0.9\n"));
    REQUIRE(cells.size() == 4u);
    for (const SimCell& c : cells) {
        DesignInputs d;
        d.delta = 0.2;
        d.target_power = c.target_power.value();
        CHECK(c.spec.n == ppi_pp_n(calibrate_r2(1.0, c.spec.rho * c.spec.rho), 500.0, d).n_star);
    }
    const auto classical = expand_cells(SimConfig::parse(
        "experiment = inversion_check\nN = 5000\nrho = 0.7\nlambda_mode = classical\n"));
    CHECK(classical.front().spec.n == 197);
    const auto vanilla = expand_cells(SimConfig::parse(
        "design = two_sample_cont\ndelta = 0.3\nexperiment = inversion_check\nN = 5000\nrho = 0.7\n"
        "lambda_mode = vanilla\n"));
    CHECK(vanilla.front().spec.n == 109);
    CHECK(vanilla.front().spec.n_other == 109);
}

TEST_CASE("misspecification keeps true rho inside (0.01, 0.99)") {
    const auto cells = expand_cells(SimConfig::parse(
        "experiment = misspecified_rho\nN = 500\n"
        "rho_shift = -0.20, -0.15, -0.10, -0.05, 0, 0.05, 0.10, 0.15, 0.20\n"));
    CHECK(cells.size() == 9u + 9u + 6u);
    for (const SimCell& c : cells) {
        CHECK(c.spec.rho > 0.01);
        CHECK(c.spec.rho < 0.99);
        REQUIRE(c.rho_plan.has_value());
    }
}

TEST_CASE("misspecified prediction quality moves power in the direction of the error") {
    const auto cells = expand_cells(SimConfig::parse(
        "experiment = misspecified_rho\nN = 500\nrho = 0.7\nrho_shift = -0.2, 0, 0.2\n"));
    REQUIRE(cells.size() == 3u);
    const double low = cell_analytic_power(cells[0].spec);
    const double exact = cell_analytic_power(cells[1].spec);
    const double high = cell_analytic_power(cells[2].spec);
    CHECK(low < 0.8);
    CHECK(exact >= 0.8);
    CHECK(high > exact);

    SimCell under = cells[0], over = cells[2];
    under.spec.replicates = over.spec.replicates = 2000;
    const double e_low = run_cell(under, 0, quick()).empirical_power;
    const double e_high = run_cell(over, 2, quick()).empirical_power;
    CHECK(e_low < 0.8);
    CHECK(e_high > 0.8);
}

TEST_CASE("unequal groups split both totals in the same ratio") {
    const auto cells = expand_cells(SimConfig::parse(
        "design = two_sample_cont\nexperiment = unequal_groups\nrho = 0.7\ndelta = 0.3\n"));
    REQUIRE(cells.size() == 5u);
    const int want_n[] = {50, 60, 67, 75, 80};
    const int want_N[] = {300, 360, 400, 450, 480};
    double previous = 2.0;
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(cells[i].spec.n == want_n[i]);
        CHECK(cells[i].spec.n_other == 100 - want_n[i]);
        CHECK(cells[i].spec.N == want_N[i]);
        CHECK(cells[i].spec.N_other == 600 - want_N[i]);
        // Balanced allocation is the most powerful split of a fixed budget.
        const double p = cell_analytic_power(cells[i].spec);
        CHECK(p < previous);
        previous = p;
    }
}

TEST_CASE("analytic comparator per tuning mode") {
    CellSpec c;
    c.n = 60;
    c.N = 300;
    const MomentSet m = calibrate_r2(1.0, 0.49);
    DesignInputs d;
    d.delta = 0.2;
    CHECK(cell_analytic_power(c) == doctest::Approx(ppi_pp_power(m, {60, 300}, d)).epsilon(1e-14));
    c.lambda_mode = LambdaMode::classical;
    CHECK(cell_analytic_power(c) == doctest::Approx(classical_power(60, 1.0, d)).epsilon(1e-14));
    c.lambda_mode = LambdaMode::vanilla;
    CHECK(cell_analytic_power(c) == doctest::Approx(vanilla_ppi_power(m, {60, 300}, d)).epsilon(1e-14));
    c.lambda_mode = LambdaMode::oracle;
    c.delta = 0.0;
    CHECK(cell_analytic_power(c) == doctest::Approx(0.05).epsilon(1e-14));
    CellSpec logistic;
    logistic.design = Design::logistic_contrast;
    CHECK_THROWS_AS(cell_analytic_power(logistic), Error);
}

TEST_CASE("rows do not depend on the thread count") {
    CellSpec c;
    c.design = Design::two_sample_bin;
    c.replicates = 300;
    c.lambda_mode = LambdaMode::crossfit;
    RunOptions one = quick(1), four = quick(4);
    one.null_runs = four.null_runs = true;
    const SimRow a = run_cell(cell_of(c), 5, one);
    const SimRow b = run_cell(cell_of(c), 5, four);
    CHECK(a.empirical_power == b.empirical_power);
    CHECK(a.type1 == b.type1);
    CHECK(a.lambda_rmse == b.lambda_rmse);
    const SimRow other = run_cell(cell_of(c), 6, one);
    CHECK(other.empirical_power != a.empirical_power);
}

TEST_CASE("experiment CSV is reproducible and well formed") {
    const SimConfig cfg = SimConfig::parse("n = 30\nN = 200\nrho = 0.7\nreplicates = 200\nnull_runs = true\n");
    const std::string csv = run_experiment(cfg).to_csv();
    CHECK(csv == run_experiment(cfg).to_csv());
    const std::string header =
        "design,n,N,rho_or_accuracy,delta,lambda_mode,analytic_power,empirical_power,type1,lambda_rmse,"
        "mc_stderr,n_dropped,n_other,N_other,target_power,rho_plan,pool_exhausted\n";
    REQUIRE(csv.rfind(header, 0) == 0);
    const std::string row = csv.substr(header.size());
    CHECK(row.rfind("one_sample_cont,30,200,0.7,0.2,oracle,", 0) == 0);
    CHECK(row.find(",NA,NA,NA,NA,false\n") != std::string::npos);
    CHECK(std::count(row.begin(), row.end(), ',') == 16);
}

TEST_CASE("empirical power tracks the analytic curve at moderate n") {
    CellSpec c;
    c.n = 100;
    c.N = 500;
    c.replicates = 2000;
    const SimRow r = run_cell(cell_of(c), 0, quick());
    CHECK(r.n_used == 2000);
    CHECK(r.abs_discrepancy < 0.02 + 3.0 * r.mc_stderr);
    CHECK(r.mc_stderr == doctest::Approx(std::sqrt(r.empirical_power * (1 - r.empirical_power) / 2000)));
}

TEST_CASE("null cells reject near the nominal level") {
    CellSpec c;
    c.design = Design::paired_cont;
    c.n = 100;
    c.delta = 0.0;
    c.replicates = 2000;
    const SimRow r = run_cell(cell_of(c), 0, quick());
    CHECK(std::abs(r.empirical_power - 0.05) < 4.0 * std::sqrt(0.05 * 0.95 / 2000));
}

TEST_CASE("plug-in tuning error shrinks as n grows") {
    double previous = 1e9;
    for (int n : {20, 50, 100, 200, 500}) {
        CellSpec c;
        c.n = n;
        c.N = 1000;
        c.lambda_mode = LambdaMode::plugin;
        c.replicates = 300;
        const double rmse = run_cell(cell_of(c), static_cast<std::uint64_t>(n), quick()).lambda_rmse;
        CHECK(rmse < previous);
        previous = rmse;
    }
}

TEST_CASE("regression cells account for every replicate") {
    CellSpec c;
    c.design = Design::logistic_contrast;
    c.accuracy = 0.8;
    c.delta = 0.5;
    c.n = 30;
    c.N = 200;
    c.replicates = 60;
    c.lambda_mode = LambdaMode::crossfit;
    RunOptions o = quick();
    o.reference_samples = 20000;
    const SimRow r = run_cell(cell_of(c), 0, o);
    CHECK(r.n_used + r.n_dropped == 60);
    CHECK(r.analytic_power > 0.05);
    CHECK(r.lambda_rmse > 0.0);

    CellSpec ols = c;
    ols.design = Design::ols_contrast;
    ols.lambda_mode = LambdaMode::oracle;
    const SimRow s = run_cell(cell_of(ols), 1, o);
    CHECK(s.n_dropped == 0);
    CHECK(s.lambda_rmse == 0.0);
}

TEST_CASE("2x2 cells use the log scale effect") {
    CellSpec c;
    c.design = Design::two_by_two_or;
    c.p_base = 0.2;
    c.p_treat = 0.4;
    c.accuracy = 0.9;
    c.replicates = 100;
    const SimRow r = run_cell(cell_of(c), 0, quick());
    CHECK(r.effect == doctest::Approx(std::log((0.4 / 0.6) / (0.2 / 0.8))));
    CHECK(r.analytic_power > 0.5);
}
