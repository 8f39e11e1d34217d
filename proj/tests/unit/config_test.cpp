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


#include <filesystem>
#include <string>

#include <doctest.h>

#include "ppipower/sim/config.hpp"
#include "test_util.hpp"

using namespace ppipower;
using namespace ppipower::sim;
using ppipower::testing::error_code;

namespace {

std::string config_error(const std::string& text) {
    try {
        (void)SimConfig::parse(text);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::config);
        return e.what();
    }
    return "no error";
}

}  // namespace

TEST_CASE("defaults describe the one-sample Gaussian grid") {
    const SimConfig c = SimConfig::parse("");
    CHECK(c.design == Design::one_sample_cont);
    CHECK(c.experiment == Experiment::grid);
    CHECK(c.n == std::vector<int>{20, 40, 60, 80, 100});
    CHECK(c.N == std::vector<int>{200, 500});
    CHECK(c.replicates == 1000);
    CHECK(c.lambda_mode == LambdaMode::oracle);
}

TEST_CASE("keys, lists and comments") {
    const SimConfig c = SimConfig::parse(
        "# header comment\n"
        "design = two_sample_bin   # trailing comment\n"
        "\n"
        "  n = 10, 30 \n"
        "N=100\n"
        "accuracy = 0.7,0.9\n"
        "delta = 0.08\n"
        "lambda_mode = crossfit\n"
        "folds = 3\n"
        "seed = 18446744073709551615\n"
        "null_runs = yes\n"
        "null_replicates = 2000\n"
        "outcome_dist = bernoulli\n");
    CHECK(c.design == Design::two_sample_bin);
    CHECK(c.n == std::vector<int>{10, 30});
    CHECK(c.N == std::vector<int>{100});
    CHECK(c.accuracy == std::vector<double>{0.7, 0.9});
    CHECK(c.lambda_mode == LambdaMode::crossfit);
    CHECK(c.folds == 3);
    CHECK(c.seed == 18446744073709551615ull);
    CHECK(c.null_runs);
    CHECK(c.null_replicates == 2000);
}

TEST_CASE("errors name the line and key") {
    CHECK(config_error("n = 10\nbogus = 1\n") == "line 2: bogus: unknown key");
    CHECK(config_error("replicates = ten\n").rfind("line 1: replicates:", 0) == 0);
    CHECK(config_error("design = anova\n").rfind("line 1: design:", 0) == 0);
    CHECK(config_error("n = 10,,20\n").rfind("line 1: n:", 0) == 0);
    CHECK(config_error("just words\n").rfind("line 1:", 0) == 0);
    CHECK(config_error("rho = 0.5x\n").rfind("line 1: rho:", 0) == 0);
}

TEST_CASE("validation") {
    CHECK(error_code([] { SimConfig::parse("replicates = 0\n"); }) == ErrorCode::config);
    CHECK(error_code([] { SimConfig::parse("N = \n"); }) == ErrorCode::config);
    CHECK(error_code([] { SimConfig::parse("experiment = unequal_groups\n"); }) == ErrorCode::config);
    CHECK(error_code([] { SimConfig::parse("target_power = 1.2\n"); }) == ErrorCode::config);
    CHECK(error_code([] { SimConfig::parse("lambda_mode = crossfit\nfolds = 1\n"); }) == ErrorCode::config);
    CHECK(error_code([] { SimConfig::load("/nonexistent/file.cfg"); }) == ErrorCode::config);
}

TEST_CASE("every shipped config parses") {
    int count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(PPIPOWER_CONFIG_DIR)) {
        if (entry.path().extension() != ".cfg") continue;
        CAPTURE(entry.path().string());
        CHECK_NOTHROW(SimConfig::load(entry.path()));
        ++count;
    }
    CHECK(count >= 10);
}
