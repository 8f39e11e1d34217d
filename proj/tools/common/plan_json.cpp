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

#include "common/plan_json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <memory>
#include <set>

namespace ppipower::tools {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kCurvePoints = 100;

[[noreturn]] void bad_request(const std::string& field, const std::string& message) {
    throw RequestError(400, "invalid_request", {{field, message}});
}

// Turns a failing C API status into the matching request error.
void check(ppw_status s, const std::string& field = "") {
    if (s == PPW_OK) return;
    const std::string message = ppw_last_error();
    const std::string code = ppw_status_name(s);
    if (s == PPW_ERR_INFEASIBLE || s == PPW_ERR_UNATTAINABLE) {
        const double minimal = ppw_last_error_minimal_unlabeled();
        throw RequestError(422, code, {{field, message}},
                           std::isnan(minimal) ? std::nullopt : std::optional<double>(minimal));
    }
    if (s == PPW_ERR_INTERNAL) throw RequestError(500, code, {{field, message}});
    throw RequestError(400, code, {{field, message}});
}

// Reads typed fields from one JSON object and rejects anything unread.
class Fields {
public:
    Fields(const Json& body, std::string prefix) : body_(body), prefix_(std::move(prefix)) {
        if (!body_.is_object()) {
            throw RequestError(400, "invalid_request",
                               {{prefix_.empty() ? "body" : trim_dot(prefix_), "must be a JSON object"}});
        }
    }

    bool has(const std::string& key) const { return body_.contains(key); }

    std::optional<double> number(const std::string& key) {
        seen_.insert(key);
        if (!body_.contains(key)) return std::nullopt;
        const Json& v = body_.at(key);
        if (!v.is_number()) error(key, "must be a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) error(key, "must be finite");
        return x;
    }

    double required(const std::string& key) {
        const auto v = number(key);
        if (!v) error(key, "is required");
        return *v;
    }

    double optional(const std::string& key, double fallback) { return number(key).value_or(fallback); }

    // Unlabeled pool sizes: a number >= 1 or the string "inf".
    std::optional<double> pool(const std::string& key) {
        seen_.insert(key);
        if (!body_.contains(key)) return std::nullopt;
        const Json& v = body_.at(key);
        if (v.is_string() && v.get<std::string>() == "inf") return kInf;
        if (!v.is_number()) error(key, "must be a number or \"inf\"");
        const double x = v.get<double>();
        if (!(x >= 1.0)) error(key, "must be at least 1");
        return x;
    }

    std::optional<std::string> text(const std::string& key) {
        seen_.insert(key);
        if (!body_.contains(key)) return std::nullopt;
        if (!body_.at(key).is_string()) error(key, "must be a string");
        return body_.at(key).get<std::string>();
    }

    const Json* object(const std::string& key) {
        seen_.insert(key);
        return body_.contains(key) ? &body_.at(key) : nullptr;
    }

    std::string path(const std::string& key) const { return prefix_ + key; }

    [[noreturn]] void error(const std::string& key, const std::string& message) const {
        bad_request(path(key), message);
    }

    void range(const std::string& key, double v, double lo, double hi, bool open_lo, bool open_hi) const {
        const bool ok = (open_lo ? v > lo : v >= lo) && (open_hi ? v < hi : v <= hi);
        if (!ok) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "must lie in %c%g, %g%c", open_lo ? '(' : '[', lo, hi,
                          open_hi ? ')' : ']');
            error(key, buf);
        }
    }

    // Collects every unknown key, so the client sees them all at once.
    void finish() const {
        std::vector<FieldError> errors;
        for (const auto& [key, value] : body_.items()) {
            if (!seen_.count(key)) errors.push_back({path(key), "unknown field"});
        }
        if (!errors.empty()) throw RequestError(400, "invalid_request", std::move(errors));
    }

private:
    static std::string trim_dot(const std::string& s) { return s.substr(0, s.size() - 1); }

    const Json& body_;
    std::string prefix_;
    std::set<std::string> seen_;
};

Json number_or_inf(double x) { return std::isinf(x) ? Json("inf") : Json(round6(x)); }

ppw_design read_design(Fields& f, bool need_delta) {
    ppw_design d{};
    d.alpha = f.optional("alpha", 0.05);
    f.range("alpha", d.alpha, 0.0, 1.0, true, true);
    d.target_power = f.optional("power", 0.8);
    f.range("power", d.target_power, d.alpha / 2.0, 1.0, true, true);
    d.delta = need_delta ? f.required("delta") : 1.0;
    return d;
}

void echo_design(Json& inputs, const ppw_design& d, bool with_delta) {
    inputs["alpha"] = round6(d.alpha);
    inputs["power"] = round6(d.target_power);
    if (with_delta) inputs["delta"] = round6(d.delta);
}

// Moment specification: binary metrics (p, se, sp), or sigma2 plus exactly
// one of rho2, mse, or (var_f, cov_yf).
ppw_moments read_moments(Fields& f) {
    const bool binary = f.has("p") || f.has("se") || f.has("sp");
    ppw_moments m{};
    if (binary) {
        if (f.has("sigma2")) f.error("sigma2", "is implied by p for binary outcomes");
        for (const char* other : {"rho2", "mse", "var_f", "cov_yf"}) {
            if (f.has(other)) f.error(other, "cannot be combined with binary metrics");
        }
        ppw_binary_metrics b{f.required("p"), f.required("se"), f.required("sp")};
        f.range("p", b.prevalence, 0.0, 1.0, true, true);
        f.range("se", b.sensitivity, 0.0, 1.0, false, false);
        f.range("sp", b.specificity, 0.0, 1.0, false, false);
        check(ppw_calibrate_binary(&b, &m), f.path("p"));
        return m;
    }
    const double sigma2 = f.required("sigma2");
    f.range("sigma2", sigma2, 0.0, kInf, true, true);
    const int paths = int(f.has("rho2")) + int(f.has("mse")) + int(f.has("var_f") || f.has("cov_yf"));
    if (paths == 0) f.error("rho2", "one of rho2, mse, or var_f with cov_yf is required");
    if (paths > 1) f.error("rho2", "exactly one of rho2, mse, or var_f with cov_yf may be given");
    if (const auto r2 = f.number("rho2")) {
        f.range("rho2", *r2, 0.0, 1.0, false, false);
        check(ppw_calibrate_r2(sigma2, *r2, &m), f.path("rho2"));
    } else if (const auto mse = f.number("mse")) {
        f.range("mse", *mse, 0.0, kInf, false, true);
        check(ppw_calibrate_mse(sigma2, *mse, &m), f.path("mse"));
    } else {
        m.var_y = sigma2;
        m.var_f = f.required("var_f");
        m.cov_yf = f.required("cov_yf");
        f.range("var_f", m.var_f, 0.0, kInf, false, true);
        if (m.cov_yf * m.cov_yf > m.var_y * m.var_f * (1.0 + 1e-12)) {
            f.error("cov_yf", "violates the Cauchy-Schwarz bound cov^2 <= sigma2 * var_f");
        }
    }
    return m;
}

Json moments_json(const ppw_moments& m) {
    const double rho = ppw_moments_rho(&m);
    Json j;
    j["var_y"] = round6(m.var_y);
    j["var_f"] = round6(m.var_f);
    j["cov_yf"] = round6(m.cov_yf);
    j["rho"] = round6(rho);
    j["rho2"] = round6(rho * rho);
    j["conservative"] = m.conservative != 0;
    return j;
}

const char* warning_name(ppw_warning w) {
    return w == PPW_WARN_ZERO_PREDICTION_VARIANCE ? "zero_prediction_variance" : nullptr;
}

Json plan_fields(const ppw_plan& p) {
    Json j;
    j["n_star"] = p.n_star;
    if (p.n_star_other >= 0) j["n_star_other"] = p.n_star_other;
    j["n_exact"] = round6(p.n_exact);
    j["analytic_power"] = round6(p.analytic_power);
    j["variance"] = round6(p.variance);
    if (!std::isnan(p.lambda_star)) j["lambda_star"] = round6(p.lambda_star);
    if (!std::isnan(p.lambda_star_other)) j["lambda_star_other"] = round6(p.lambda_star_other);
    j["classical_n"] = p.classical_n;
    if (p.classical_n_other >= 0) j["classical_n_other"] = p.classical_n_other;
    j["reduction"] = round6(p.reduction);
    j["pool_exhausted"] = p.pool_exhausted != 0;
    const char* w = warning_name(p.warning);
    j["warning"] = w ? Json(w) : Json(nullptr);
    return j;
}

// Power curve over evenly spaced n in [1, max(2 n*, classical n)].
Json curve(const ppw_plan& p, const std::function<double(double)>& power_at) {
    const double top = std::max(2.0 * static_cast<double>(p.n_star), static_cast<double>(p.classical_n));
    Json points = Json::array();
    for (int i = 0; i < kCurvePoints; ++i) {
        const double n = 1.0 + (top - 1.0) * i / (kCurvePoints - 1);
        points.push_back(Json::array({round6(n), round6(power_at(n))}));
    }
    return points;
}

// Result of one design's resolution: the plan, its echo, and a power(n).
struct Resolved {
    ppw_plan plan{};
    Json inputs;
    std::function<double(double)> power_at;
};

using Resolver = Resolved (*)(Fields&);

Resolved resolve_mean(Fields& f) {
    Resolved r;
    const ppw_moments m = read_moments(f);
    const double N = f.pool("N").value_or(kInf);
    const ppw_design d = read_design(f, true);
    const std::string method = f.text("method").value_or("ppi++");
    if (method != "ppi++" && method != "vanilla") f.error("method", "must be \"ppi++\" or \"vanilla\"");
    const bool vanilla = method == "vanilla";
    r.inputs["method"] = method;
    r.inputs["moments"] = moments_json(m);
    r.inputs["N"] = number_or_inf(N);
    echo_design(r.inputs, d, true);
    f.finish();
    check(vanilla ? ppw_n_mean_vanilla(&m, N, &d, &r.plan) : ppw_n_mean(&m, N, &d, &r.plan));
    r.power_at = [m, N, d, vanilla](double n) {
        double out = 0.0;
        check(vanilla ? ppw_power_mean_vanilla(&m, n, N, &d, &out) : ppw_power_mean(&m, n, N, &d, &out));
        return out;
    };
    return r;
}

Resolved resolve_paired(Fields& f) {
    Resolved r;
    const ppw_moments m = read_moments(f);
    const double N = f.pool("N").value_or(kInf);
    const ppw_design d = read_design(f, true);
    r.inputs["moments"] = moments_json(m);
    r.inputs["N"] = number_or_inf(N);
    echo_design(r.inputs, d, true);
    f.finish();
    check(ppw_n_paired(&m, N, &d, &r.plan));
    r.power_at = [m, N, d](double n) {
        double out = 0.0;
        check(ppw_power_paired(&m, n, N, &d, &out));
        return out;
    };
    return r;
}

Resolved resolve_two_sample(Fields& f) {
    Resolved r;
    ppw_moments a{}, b{};
    const Json* ja = f.object("a");
    const Json* jb = f.object("b");
    if ((ja == nullptr) != (jb == nullptr)) f.error(ja ? "b" : "a", "groups a and b must both be given");
    if (ja) {
        Fields fa(*ja, f.path("a."));
        a = read_moments(fa);
        fa.finish();
        Fields fb(*jb, f.path("b."));
        b = read_moments(fb);
        fb.finish();
    } else {
        a = b = read_moments(f);
    }
    const auto shared = f.pool("N");
    const double N_a = f.pool("N_a").value_or(shared.value_or(kInf));
    const double N_b = f.pool("N_b").value_or(shared.value_or(kInf));
    const double kappa = f.optional("kappa", 1.0);
    f.range("kappa", kappa, 0.0, kInf, true, true);
    const ppw_design d = read_design(f, true);
    r.inputs["a"] = moments_json(a);
    r.inputs["b"] = moments_json(b);
    r.inputs["N_a"] = number_or_inf(N_a);
    r.inputs["N_b"] = number_or_inf(N_b);
    r.inputs["kappa"] = round6(kappa);
    echo_design(r.inputs, d, true);
    f.finish();
    check(ppw_n_two_sample(&a, &b, N_a, N_b, kappa, &d, &r.plan));
    r.power_at = [a, b, N_a, N_b, kappa, d](double n) {
        double out = 0.0;
        check(ppw_power_two_sample(&a, &b, n, N_a, N_b, kappa, &d, &out));
        return out;
    };
    return r;
}

Resolved resolve_two_by_two(Fields& f) {
    Resolved r;
    ppw_two_by_two t{};
    t.p0 = f.required("p0");
    t.p1 = f.required("p1");
    f.range("p0", t.p0, 0.0, 1.0, true, true);
    f.range("p1", t.p1, 0.0, 1.0, true, true);
    const bool metrics = f.has("se") || f.has("sp");
    if (metrics && (f.has("rho0") || f.has("rho1"))) {
        f.error("rho0", "give either rho0/rho1 or classifier se/sp, not both");
    }
    if (metrics) {
        const double se = f.required("se");
        const double sp = f.required("sp");
        f.range("se", se, 0.0, 1.0, false, false);
        f.range("sp", sp, 0.0, 1.0, false, false);
        ppw_moments m0{}, m1{};
        const ppw_binary_metrics b0{t.p0, se, sp}, b1{t.p1, se, sp};
        check(ppw_calibrate_binary(&b0, &m0), f.path("se"));
        check(ppw_calibrate_binary(&b1, &m1), f.path("se"));
        t.rho0 = ppw_moments_rho(&m0);
        t.rho1 = ppw_moments_rho(&m1);
    } else {
        t.rho0 = f.optional("rho0", 0.0);
        t.rho1 = f.optional("rho1", 0.0);
        f.range("rho0", t.rho0, -1.0, 1.0, false, false);
        f.range("rho1", t.rho1, -1.0, 1.0, false, false);
    }
    t.kappa = f.optional("kappa", 1.0);
    f.range("kappa", t.kappa, 0.0, kInf, true, true);
    const std::string measure = f.text("measure").value_or("RR");
    if (measure != "RR" && measure != "OR") f.error("measure", "must be \"RR\" or \"OR\"");
    t.measure = measure == "OR" ? PPW_ODDS_RATIO : PPW_RELATIVE_RISK;
    const ppw_design d = read_design(f, false);
    r.inputs["p0"] = round6(t.p0);
    r.inputs["p1"] = round6(t.p1);
    r.inputs["rho0"] = round6(t.rho0);
    r.inputs["rho1"] = round6(t.rho1);
    r.inputs["kappa"] = round6(t.kappa);
    r.inputs["measure"] = measure;
    echo_design(r.inputs, d, false);
    f.finish();
    check(ppw_n_two_by_two(&t, &d, &r.plan));
    r.power_at = [t, d](double n0) {
        double out = 0.0;
        check(ppw_power_two_by_two(&t, n0, d.alpha, &out));
        return out;
    };
    return r;
}

Resolved resolve_regression(Fields& f) {
    Resolved r;
    ppw_blocks c{f.required("v_yy"), f.required("v_ff"), f.required("v_yf")};
    f.range("v_yy", c.v_yy, 0.0, kInf, true, true);
    f.range("v_ff", c.v_ff, 0.0, kInf, false, true);
    const double N = f.pool("N").value_or(kInf);
    const ppw_design d = read_design(f, true);
    r.inputs["v_yy"] = round6(c.v_yy);
    r.inputs["v_ff"] = round6(c.v_ff);
    r.inputs["v_yf"] = round6(c.v_yf);
    r.inputs["N"] = number_or_inf(N);
    echo_design(r.inputs, d, true);
    f.finish();
    check(ppw_n_regression(&c, N, &d, &r.plan));
    r.power_at = [c, N, d](double n) {
        double out = 0.0;
        check(ppw_power_regression(&c, n, N, &d, &out));
        return out;
    };
    return r;
}

Resolver resolver_for(std::string_view design) {
    if (design == "mean") return resolve_mean;
    if (design == "two-sample") return resolve_two_sample;
    if (design == "paired") return resolve_paired;
    if (design == "two-by-two") return resolve_two_by_two;
    if (design == "regression") return resolve_regression;
    return nullptr;
}

}  // namespace

RequestError::RequestError(int status, std::string code, std::vector<FieldError> errors,
                           std::optional<double> minimal_N)
    : std::runtime_error(errors.empty() ? code : errors.front().message),
      status_(status),
      code_(std::move(code)),
      errors_(std::move(errors)),
      minimal_N_(minimal_N) {}

Json RequestError::to_json() const {
    Json j;
    j["error"] = code_;
    Json list = Json::array();
    for (const auto& e : errors_) {
        Json item;
        item["field"] = e.field.empty() ? Json(nullptr) : Json(e.field);
        item["message"] = e.message;
        list.push_back(item);
    }
    j["errors"] = list;
    if (minimal_N_) j["minimal_N"] = *minimal_N_;
    return j;
}

bool is_plan_design(std::string_view design) { return resolver_for(design) != nullptr; }

Json plan(std::string_view design, const Json& body) {
    const Resolver resolve = resolver_for(design);
    if (!resolve) bad_request("design", "unknown design '" + std::string(design) + "'");
    Fields f(body, "");
    Resolved r = resolve(f);
    Json out;
    out["design"] = std::string(design);
    out.update(plan_fields(r.plan));
    out["inputs"] = r.inputs;
    out["curve"] = curve(r.plan, r.power_at);
    return out;
}

Json power(std::string_view design, const Json& body) {
    const Resolver resolve = resolver_for(design);
    if (!resolve) bad_request("design", "unknown design '" + std::string(design) + "'");
    Json rest = body;
    if (!rest.is_object()) bad_request("body", "must be a JSON object");
    if (!rest.contains("n")) bad_request("n", "is required");
    if (!rest.at("n").is_number()) bad_request("n", "must be a number");
    const double n = rest.at("n").get<double>();
    if (!(n >= 1.0) || !std::isfinite(n)) bad_request("n", "must be at least 1");
    rest.erase("n");
    Fields f(rest, "");
    Resolved r = resolve(f);
    Json out;
    out["design"] = std::string(design);
    if (n == std::floor(n) && n < 9.0e15) {
        out["n"] = static_cast<std::int64_t>(n);
    } else {
        out["n"] = round6(n);
    }
    out["power"] = round6(r.power_at(n));
    out["inputs"] = r.inputs;
    return out;
}

Json calibrate(const Json& body) {
    Fields f(body, "");
    Json out;
    if (const auto csv = f.text("pilot_csv")) {
        const auto group = f.text("group");
        f.finish();
        ppw_pilot* raw = nullptr;
        check(ppw_pilot_parse_csv(csv->data(), csv->size(), &raw), "pilot_csv");
        std::unique_ptr<ppw_pilot, void (*)(ppw_pilot*)> pilot(raw, ppw_pilot_destroy);
        ppw_moments m{};
        check(ppw_pilot_moments(pilot.get(), group ? group->c_str() : nullptr, &m), "pilot_csv");
        out["source"] = "pilot";
        out.update(moments_json(m));
        return out;
    }
    const bool binary = f.has("p") || f.has("se") || f.has("sp");
    const ppw_moments m = read_moments(f);
    f.finish();
    out["source"] = binary ? "binary" : (m.conservative ? "mse" : "moments");
    out.update(moments_json(m));
    return out;
}

Json sim_result_json(const ppw_sim_result* result) {
    Json rows = Json::array();
    const std::size_t count = ppw_sim_result_rows(result);
    auto optional_real = [](double x) { return std::isnan(x) ? Json(nullptr) : Json(round6(x)); };
    for (std::size_t i = 0; i < count; ++i) {
        ppw_sim_row row{};
        check(ppw_sim_result_row(result, i, &row));
        Json j;
        j["design"] = row.design;
        j["n"] = row.n;
        j["N"] = row.N;
        j["n_other"] = row.n_other >= 0 ? Json(row.n_other) : Json(nullptr);
        j["N_other"] = row.N_other >= 0 ? Json(row.N_other) : Json(nullptr);
        j["rho_or_accuracy"] = round6(row.rho_or_accuracy);
        j["delta"] = round6(row.effect);
        j["lambda_mode"] = row.lambda_mode;
        j["analytic_power"] = round6(row.analytic_power);
        j["empirical_power"] = round6(row.empirical_power);
        j["abs_discrepancy"] = round6(row.abs_discrepancy);
        j["type1"] = optional_real(row.type1);
        j["lambda_rmse"] = round6(row.lambda_rmse);
        j["mc_stderr"] = round6(row.mc_stderr);
        j["n_dropped"] = row.n_dropped;
        j["target_power"] = optional_real(row.target_power);
        j["rho_plan"] = optional_real(row.rho_plan);
        j["pool_exhausted"] = row.pool_exhausted != 0;
        rows.push_back(j);
    }
    Json out;
    out["rows"] = rows;
    return out;
}

double round6(double x) {
    if (!std::isfinite(x)) return x;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return std::strtod(buf, nullptr);
}

std::string render(const Json& j) { return j.dump(2) + "\n"; }

std::string render_text(const Json& j) {
    std::string out;
    for (const auto& [key, value] : j.items()) {
        if (value.is_object() || value.is_array()) continue;
        out += key;
        out += '=';
        out += value.is_string() ? value.get<std::string>() : (value.is_null() ? "none" : value.dump());
        out += '\n';
    }
    return out;
}

}  // namespace ppipower::tools
