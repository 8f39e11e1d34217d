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
#include <string>

#include <doctest.h>

#include "common/plan_json.hpp"

using namespace ppipower::tools;

namespace {

Json mean_body() {
    return Json::parse(R"({"sigma2": 1, "rho2": 0.49, "N": 5000, "delta": 0.2, "alpha": 0.05, "power": 0.8})");
}

int request_status(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const RequestError& e) {
        return e.status();
    }
    return 0;
}

}  // namespace

TEST_CASE("round6 keeps six significant digits") {
    CHECK(round6(0.4822335025) == 0.482234);
    CHECK(round6(101.99512) == 101.995);
    CHECK(round6(-1.23456789e-7) == -1.23457e-7);
    CHECK(round6(0.0) == 0.0);
    CHECK(std::isinf(round6(INFINITY)));
}

TEST_CASE("mean plan") {
    const Json j = plan("mean", mean_body());
    CHECK(j["design"] == "mean");
    CHECK(j["n_star"] == 102);
    CHECK(j["classical_n"] == 197);
    CHECK(j["reduction"].get<double>() == doctest::Approx(0.482).epsilon(0.001));
    CHECK(j["pool_exhausted"] == false);
    CHECK(j["warning"].is_null());
    CHECK(j["inputs"]["moments"]["cov_yf"] == 0.7);
    CHECK(j["inputs"]["N"] == 5000.0);
    CHECK(j["inputs"]["method"] == "ppi++");

    Json vanilla = mean_body();
    vanilla["method"] = "vanilla";
    CHECK(plan("mean", vanilla)["n_star"] == 123);

    Json infinite = mean_body();
    infinite["N"] = "inf";
    CHECK(plan("mean", infinite)["inputs"]["N"] == "inf");
}

TEST_CASE("curve has 100 monotone points spanning the planning range") {
    for (const char* design : {"mean", "paired"}) {
        const Json c = plan(design, mean_body())["curve"];
        REQUIRE(c.size() == 100u);
        CHECK(c.front()[0] == 1.0);
        CHECK(c.back()[0] == 204.0);
        for (std::size_t i = 1; i < c.size(); ++i) {
            CHECK(c[i][0].get<double>() > c[i - 1][0].get<double>());
            CHECK(c[i][1].get<double>() >= c[i - 1][1].get<double>());
        }
    }
}

TEST_CASE("other designs") {
    const Json tbt = plan("two-by-two",
                          Json::parse(R"({"p0": 0.2, "p1": 0.4, "rho0": 0, "rho1": 0, "kappa": 1, "measure": "RR"})"));
    CHECK(tbt["n_star"] == 90);
    CHECK(tbt["classical_n"] == 90);

    Json two = mean_body();
    two["delta"] = 0.3;
    const Json ts = plan("two-sample", two);
    CHECK(ts["n_star"] == 91);
    CHECK(ts["n_star_other"] == 91);
    CHECK(ts["classical_n"] == 175);

    const Json split = plan("two-sample", Json::parse(R"({
        "a": {"sigma2": 1, "rho2": 0.49}, "b": {"p": 0.3, "se": 0.85, "sp": 0.85},
        "N_a": 5000, "N_b": "inf", "kappa": 2, "delta": 0.3})"));
    CHECK(split["n_star_other"].get<long>() >= 2 * split["n_star"].get<long>() - 1);
    CHECK(split["inputs"]["N_b"] == "inf");

    const Json reg = plan("regression", Json::parse(R"({"v_yy": 2, "v_ff": 2, "v_yf": 1.4, "N": 500, "delta": 0.3})"));
    CHECK(reg["n_star"].get<long>() < reg["classical_n"].get<long>());
}

TEST_CASE("power endpoint logic agrees with the plan") {
    Json body = mean_body();
    body["n"] = 102;
    const Json p = power("mean", body);
    CHECK(p["n"] == 102);
    CHECK(p["power"] == plan("mean", mean_body())["analytic_power"]);
    body["n"] = 0.5;
    CHECK(request_status([&] { power("mean", body); }) == 400);
}

TEST_CASE("validation errors list fields") {
    Json body = mean_body();
    body["foo"] = 1;
    body["bar"] = 2;
    try {
        plan("mean", body);
        FAIL("expected an error");
    } catch (const RequestError& e) {
        CHECK(e.status() == 400);
        const Json j = e.to_json();
        CHECK(j["error"] == "invalid_request");
        REQUIRE(j["errors"].size() == 2u);
        CHECK(j["errors"][0]["field"] == "foo");
        CHECK(j["errors"][1]["field"] == "bar");
        CHECK(j["errors"][0]["message"] == "unknown field");
    }

    const auto status_of = [](const char* text) {
        return request_status([&] { plan("mean", Json::parse(text)); });
    };
    CHECK(status_of(R"({"rho2": 0.49, "delta": 0.2})") == 400);
    CHECK(status_of(R"({"sigma2": 1, "rho2": 1.5, "delta": 0.2})") == 400);
    CHECK(status_of(R"({"sigma2": 1, "rho2": 0.5, "mse": 0.2, "delta": 0.2})") == 400);
    CHECK(status_of(R"({"sigma2": "1", "rho2": 0.5, "delta": 0.2})") == 400);
    CHECK(status_of(R"({"sigma2": 1, "rho2": 0.5, "delta": 0.2, "N": 0})") == 400);
    CHECK(status_of(R"({"sigma2": 1, "var_f": 1, "cov_yf": 2, "delta": 0.2})") == 400);
    CHECK(status_of(R"({"sigma2": 1, "rho2": 0.5, "delta": 0.2, "alpha": 1})") == 400);
    CHECK(status_of(R"([1, 2])") == 400);
    CHECK(request_status([] { plan("two-sample", Json::parse(R"({"a": {"sigma2": 1, "rho2": 0.4}, "delta": 0.3})")); }) ==
          400);
    CHECK(request_status([] { plan("two-sample", Json::parse(R"({"a": {"sigma2": 1, "rho2": 0.4, "x": 1},
        "b": {"sigma2": 1, "rho2": 0.4}, "delta": 0.3})")); }) == 400);
}

TEST_CASE("infeasible vanilla plans report the minimal pool") {
    Json body = mean_body();
    body["method"] = "vanilla";
    body["N"] = 50;
    try {
        plan("mean", body);
        FAIL("expected an error");
    } catch (const RequestError& e) {
        CHECK(e.status() == 422);
        const Json j = e.to_json();
        CHECK(j["error"] == "infeasible");
        REQUIRE(j.contains("minimal_N"));
        CHECK(j["minimal_N"].get<double>() > 50.0);
        // At the reported pool the plan becomes feasible.
        body["N"] = std::ceil(j["minimal_N"].get<double>()) + 1.0;
        CHECK(plan("mean", body)["n_star"].get<long>() > 0);
    }
}

TEST_CASE("calibration") {
    const Json b = calibrate(Json::parse(R"({"p": 0.3, "se": 0.85, "sp": 0.85})"));
    CHECK(b["source"] == "binary");
    CHECK(b["rho"] == 0.668292);
    const Json m = calibrate(Json::parse(R"({"sigma2": 1, "mse": 0.3})"));
    CHECK(m["source"] == "mse");
    CHECK(m["conservative"] == true);
    const Json p = calibrate(Json::parse(R"({"pilot_csv": "y,f\n1,1\n0,0\n1,0.8\n0,0.1\n"})"));
    CHECK(p["source"] == "pilot");
    CHECK(p["var_y"] == doctest::Approx(1.0 / 3.0).epsilon(1e-5));
    CHECK(request_status([] { calibrate(Json::parse(R"({"pilot_csv": "y,f\n1,x\n"})")); }) == 400);
}

TEST_CASE("renderers") {
    const Json j = plan("mean", mean_body());
    const std::string text = render_text(j);
    CHECK(text.rfind("design=mean\nn_star=102\n", 0) == 0);
    CHECK(text.find("curve") == std::string::npos);
    CHECK(text.find("warning=none\n") != std::string::npos);
    const std::string pretty = render(j);
    CHECK(pretty.back() == '\n');
    CHECK(Json::parse(pretty) == j);
    CHECK(render(plan("mean", mean_body())) == pretty);
}
