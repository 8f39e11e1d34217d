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

// ppipower command-line front end: power, n, calibrate, simulate, serve.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "common/plan_json.hpp"
#include "ppipower/ppipower.h"
#include "service/plan_service.hpp"

namespace {

using ppipower::tools::Json;
using ppipower::tools::RequestError;

constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitFailure = 1;

enum class Format { text, json, csv };

struct Output {
    bool json = false;
    bool csv = false;

    Format format() const { return json ? Format::json : (csv ? Format::csv : Format::text); }
};

// Numeric planning flags. Only flags present on the command line reach the
// request body, so the service and the CLI see identical documents.
struct PlanFlags {
    std::string design;
    std::map<std::string, double> numbers;
    std::optional<std::string> N, N_a, N_b;
    std::optional<std::string> method, measure;
    bool binary = false;
};

void add_number(CLI::App* cmd, PlanFlags& flags, const std::string& flag, const std::string& key,
                const std::string& help) {
    cmd->add_option_function<double>(
        flag, [&flags, key](double v) { flags.numbers[key] = v; }, help);
}

void add_plan_flags(CLI::App* cmd, PlanFlags& flags) {
    cmd->add_option("--design", flags.design,
                    "one-sample (alias mean), two-sample, paired, two-by-two, regression")
        ->required();
    add_number(cmd, flags, "--sigma2", "sigma2", "outcome variance");
    add_number(cmd, flags, "--rho2", "rho2", "squared correlation between outcome and prediction");
    add_number(cmd, flags, "--mse", "mse", "prediction mean squared error (conservative path)");
    add_number(cmd, flags, "--var-f", "var_f", "prediction variance");
    add_number(cmd, flags, "--cov-yf", "cov_yf", "outcome/prediction covariance");
    cmd->add_flag("--binary", flags.binary, "binary outcome described by --p/--se/--sp");
    add_number(cmd, flags, "--p", "p", "prevalence");
    add_number(cmd, flags, "--se", "se", "classifier sensitivity");
    add_number(cmd, flags, "--sp", "sp", "classifier specificity");
    cmd->add_option("--N", flags.N, "unlabeled pool size, or inf");
    cmd->add_option("--N-a", flags.N_a, "group A unlabeled pool (two-sample)");
    cmd->add_option("--N-b", flags.N_b, "group B unlabeled pool (two-sample)");
    add_number(cmd, flags, "--kappa", "kappa", "allocation ratio n_B / n_A");
    add_number(cmd, flags, "--delta", "delta", "effect size");
    add_number(cmd, flags, "--alpha", "alpha", "two-sided level (default 0.05)");
    add_number(cmd, flags, "--power", "power", "target power (default 0.8)");
    cmd->add_option("--method", flags.method, "ppi++ (default) or vanilla, mean design only");
    add_number(cmd, flags, "--p0", "p0", "control event probability (two-by-two)");
    add_number(cmd, flags, "--p1", "p1", "treatment event probability (two-by-two)");
    add_number(cmd, flags, "--rho0", "rho0", "control-arm correlation (two-by-two)");
    add_number(cmd, flags, "--rho1", "rho1", "treatment-arm correlation (two-by-two)");
    cmd->add_option("--measure", flags.measure, "RR (default) or OR (two-by-two)");
    add_number(cmd, flags, "--v-yy", "v_yy", "contrast outcome score variance (regression)");
    add_number(cmd, flags, "--v-ff", "v_ff", "contrast prediction score variance (regression)");
    add_number(cmd, flags, "--v-yf", "v_yf", "contrast score covariance (regression)");
}

void add_format_flags(CLI::App* cmd, Output& out) {
    auto* json = cmd->add_flag("--json", out.json, "emit a single JSON object");
    cmd->add_flag("--csv", out.csv, "emit a header row and a value row")->excludes(json);
}

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Json pool_value(const std::string& flag, const std::string& text) {
    if (text == "inf") return "inf";
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || *end != '\0') throw UsageError(flag + ": expected a number or inf, got '" + text + "'");
    return v;
}

std::string canonical_design(const std::string& name) {
    if (name == "one-sample" || name == "mean") return "mean";
    if (ppipower::tools::is_plan_design(name)) return name;
    throw UsageError("--design: unknown design '" + name + "'");
}

Json plan_body(const PlanFlags& flags) {
    Json body = Json::object();
    for (const auto& [key, value] : flags.numbers) body[key] = value;
    if (flags.binary && !(body.contains("p") && body.contains("se") && body.contains("sp"))) {
        throw UsageError("--binary needs --p, --se and --sp");
    }
    if (flags.N) body["N"] = pool_value("--N", *flags.N);
    if (flags.N_a) body["N_a"] = pool_value("--N-a", *flags.N_a);
    if (flags.N_b) body["N_b"] = pool_value("--N-b", *flags.N_b);
    if (flags.method) body["method"] = *flags.method;
    if (flags.measure) body["measure"] = *flags.measure;
    return body;
}

std::string render_csv(const Json& j) {
    std::string header, values;
    for (const auto& [key, value] : j.items()) {
        if (value.is_object() || value.is_array()) continue;
        if (!header.empty()) {
            header += ',';
            values += ',';
        }
        header += key;
        values += value.is_string() ? value.get<std::string>() : (value.is_null() ? "NA" : value.dump());
    }
    return header + '\n' + values + '\n';
}

void emit(const Json& j, Format format) {
    switch (format) {
        case Format::json: std::cout << ppipower::tools::render(j); break;
        case Format::csv: std::cout << render_csv(j); break;
        case Format::text: std::cout << ppipower::tools::render_text(j); break;
    }
}

int report(const RequestError& e, Format format) {
    std::cerr << "error: " << e.code();
    for (const auto& f : e.errors()) {
        std::cerr << ": " << (f.field.empty() ? "" : f.field + ": ") << f.message;
    }
    std::cerr << '\n';
    if (format == Format::json) std::cout << ppipower::tools::render(e.to_json());
    if (e.status() == 400) return kExitUsage;
    if (e.status() == 422) return kExitInfeasible;
    return kExitFailure;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_simulate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 std::optional<int> threads, std::optional<int> replicates,
                 const std::string& output_path, Format format) {
    ppw_sim_config* raw_cfg = nullptr;
    auto fail = [&](ppw_status s) {
        throw RequestError(s == PPW_ERR_CONFIG || s == PPW_ERR_PARSE ? 400 : 500, ppw_status_name(s),
                           {{"", ppw_last_error()}});
    };
    if (ppw_status s = ppw_sim_config_load(config_path.c_str(), &raw_cfg); s != PPW_OK) fail(s);
    std::unique_ptr<ppw_sim_config, void (*)(ppw_sim_config*)> cfg(raw_cfg, ppw_sim_config_destroy);
    if (seed) ppw_sim_config_set_seed(cfg.get(), *seed);
    if (threads) {
        if (ppw_status s = ppw_sim_config_set_threads(cfg.get(), *threads); s != PPW_OK) fail(s);
    }
    if (replicates) {
        if (ppw_status s = ppw_sim_config_set_replicates(cfg.get(), *replicates); s != PPW_OK) fail(s);
    }
    ppw_sim_result* raw_res = nullptr;
    if (ppw_status s = ppw_simulate(cfg.get(), &raw_res); s != PPW_OK) fail(s);
    std::unique_ptr<ppw_sim_result, void (*)(ppw_sim_result*)> res(raw_res, ppw_sim_result_destroy);

    std::string text;
    if (format == Format::json) {
        text = ppipower::tools::render(ppipower::tools::sim_result_json(res.get()));
    } else {
        std::size_t needed = 0;
        ppw_sim_result_csv(res.get(), nullptr, 0, &needed);
        std::vector<char> buf(needed);
        if (ppw_status s = ppw_sim_result_csv(res.get(), buf.data(), buf.size(), &needed); s != PPW_OK) fail(s);
        text.assign(buf.data(), needed - 1);
    }
    if (output_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(output_path, std::ios::binary);
        if (!out) throw UsageError("cannot write '" + output_path + "'");
        out << text;
    }
    return 0;
}

int default_port() {
    if (const char* env = std::getenv("PPIPOWER_PORT")) {
        char* end = nullptr;
        const long p = std::strtol(env, &end, 10);
        if (*env != '\0' && *end == '\0' && p > 0 && p < 65536) return static_cast<int>(p);
    }
    return 8080;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sample size and power for prediction-powered inference"};
    app.set_version_flag("--version", std::string(ppw_version()));
    app.require_subcommand(1);

    PlanFlags power_flags, n_flags;
    Output power_out, n_out, cal_out, sim_out;
    double power_n = 0.0;

    auto* power_cmd = app.add_subcommand("power", "power at a given labeled sample size");
    add_plan_flags(power_cmd, power_flags);
    power_cmd->add_option("--n", power_n, "labeled sample size (group A / control)")->required();
    add_format_flags(power_cmd, power_out);

    auto* n_cmd = app.add_subcommand("n", "smallest labeled sample size reaching the target power");
    add_plan_flags(n_cmd, n_flags);
    add_format_flags(n_cmd, n_out);

    auto* cal_cmd = app.add_subcommand("calibrate", "moments from metrics or a pilot sample");
    PlanFlags cal_flags;
    add_number(cal_cmd, cal_flags, "--sigma2", "sigma2", "outcome variance");
    add_number(cal_cmd, cal_flags, "--rho2", "rho2", "squared correlation");
    add_number(cal_cmd, cal_flags, "--mse", "mse", "prediction mean squared error");
    add_number(cal_cmd, cal_flags, "--p", "p", "prevalence");
    add_number(cal_cmd, cal_flags, "--se", "se", "sensitivity");
    add_number(cal_cmd, cal_flags, "--sp", "sp", "specificity");
    cal_cmd->add_flag("--binary", cal_flags.binary, "binary outcome described by --p/--se/--sp");
    std::string pilot_path, pilot_group;
    cal_cmd->add_option("--pilot", pilot_path, "pilot CSV with header y,f[,group]");
    cal_cmd->add_option("--group", pilot_group, "restrict the pilot to one group label");
    add_format_flags(cal_cmd, cal_out);

    auto* sim_cmd = app.add_subcommand("simulate", "run a Monte Carlo experiment");
    std::string config_path, output_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads, replicates;
    sim_cmd->add_option("--config", config_path, "experiment config file")->required();
    sim_cmd->add_option("--seed", seed, "override the config seed");
    sim_cmd->add_option("--threads", threads, "worker threads (0: all cores)");
    sim_cmd->add_option("--replicates", replicates, "override the replicate count");
    sim_cmd->add_option("--output,-o", output_path, "write to a file instead of stdout");
    sim_cmd->add_flag("--json", sim_out.json, "emit JSON rows instead of CSV");

    auto* serve_cmd = app.add_subcommand("serve", "start the planning HTTP service");
    ppipower::tools::ServeOptions serve_opt;
    serve_opt.port = default_port();
    serve_cmd->add_option("--port", serve_opt.port, "listen port (env PPIPOWER_PORT)");
    serve_cmd->add_option("--host", serve_opt.host, "listen address");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    Format format = Format::text;
    try {
        if (*power_cmd) {
            format = power_out.format();
            Json body = plan_body(power_flags);
            body["n"] = power_n;
            emit(ppipower::tools::power(canonical_design(power_flags.design), body), format);
        } else if (*n_cmd) {
            format = n_out.format();
            emit(ppipower::tools::plan(canonical_design(n_flags.design), plan_body(n_flags)), format);
        } else if (*cal_cmd) {
            format = cal_out.format();
            Json body = plan_body(cal_flags);
            if (!pilot_path.empty()) {
                if (!body.empty()) throw UsageError("--pilot cannot be combined with moment flags");
                body["pilot_csv"] = read_file(pilot_path);
                if (!pilot_group.empty()) body["group"] = pilot_group;
            }
            emit(ppipower::tools::calibrate(body), format);
        } else if (*sim_cmd) {
            format = sim_out.format();
            return run_simulate(config_path, seed, threads, replicates, output_path, format);
        } else if (*serve_cmd) {
            return ppipower::tools::serve(serve_opt, [&](int port) {
                       std::cerr << "listening on http://" << serve_opt.host << ':' << port << '\n';
                   }) == 0
                       ? 0
                       : kExitFailure;
        }
    } catch (const UsageError& e) {
        std::cerr << "error: usage: " << e.what() << '\n';
        return kExitUsage;
    } catch (const RequestError& e) {
        return report(e, format);
    } catch (const std::exception& e) {
        std::cerr << "error: internal_error: " << e.what() << '\n';
        return kExitFailure;
    }
    return 0;
}
