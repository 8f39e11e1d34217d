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

#include "ppipower/sim/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ppipower/error.hpp"

namespace ppipower::sim {

namespace {

constexpr std::array<std::string_view, 4> kExperimentNames = {"grid", "inversion_check",
                                                              "misspecified_rho", "unequal_groups"};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    while (true) {
        const auto comma = s.find(',');
        out.push_back(trim(s.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

[[noreturn]] void fail(std::size_t line, std::string_view key, const std::string& why) {
    throw Error(ErrorCode::config,
                "line " + std::to_string(line) + ": " + std::string(key) + ": " + why);
}

template <typename T>
T parse_scalar(std::string_view text, std::size_t line, std::string_view key) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, value);
    if (text.empty() || res.ec != std::errc{} || res.ptr != end) {
        fail(line, key, "cannot parse '" + std::string(text) + "'");
    }
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value)) fail(line, key, "value must be finite");
    }
    return value;
}

template <typename T>
std::vector<T> parse_list(std::string_view text, std::size_t line, std::string_view key) {
    std::vector<T> out;
    for (std::string_view item : split_list(text)) out.push_back(parse_scalar<T>(item, line, key));
    return out;
}

bool parse_bool(std::string_view text, std::size_t line, std::string_view key) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    fail(line, key, "expected true or false");
}

}  // namespace

std::string_view to_string(Experiment e) { return kExperimentNames[static_cast<std::size_t>(e)]; }

SimConfig SimConfig::parse(std::string_view text) {
    SimConfig cfg;
    using Setter = std::function<void(std::string_view, std::size_t, std::string_view)>;
    const std::map<std::string_view, Setter> setters = {
        {"design", [&](auto v, auto line, auto key) {
             const auto d = parse_design(v);
             if (!d) fail(line, key, "unknown design '" + std::string(v) + "'");
             cfg.design = *d;
         }},
        {"experiment", [&](auto v, auto line, auto key) {
             for (std::size_t i = 0; i < kExperimentNames.size(); ++i) {
                 if (kExperimentNames[i] == v) {
                     cfg.experiment = static_cast<Experiment>(i);
                     return;
                 }
             }
             fail(line, key, "unknown experiment '" + std::string(v) + "'");
         }},
        {"n", [&](auto v, auto line, auto key) { cfg.n = parse_list<int>(v, line, key); }},
        {"N", [&](auto v, auto line, auto key) { cfg.N = parse_list<int>(v, line, key); }},
        {"rho", [&](auto v, auto line, auto key) { cfg.rho = parse_list<double>(v, line, key); }},
        {"accuracy", [&](auto v, auto line, auto key) { cfg.accuracy = parse_list<double>(v, line, key); }},
        {"delta", [&](auto v, auto line, auto key) { cfg.delta = parse_list<double>(v, line, key); }},
        {"p_base", [&](auto v, auto line, auto key) { cfg.p_base = parse_scalar<double>(v, line, key); }},
        {"p_treat", [&](auto v, auto line, auto key) { cfg.p_treat = parse_list<double>(v, line, key); }},
        {"target_power",
         [&](auto v, auto line, auto key) { cfg.target_power = parse_list<double>(v, line, key); }},
        {"rho_shift", [&](auto v, auto line, auto key) { cfg.rho_shift = parse_list<double>(v, line, key); }},
        {"allocation",
         [&](auto v, auto line, auto key) { cfg.allocation = parse_list<double>(v, line, key); }},
        {"n_total", [&](auto v, auto line, auto key) { cfg.n_total = parse_scalar<int>(v, line, key); }},
        {"N_total", [&](auto v, auto line, auto key) { cfg.N_total = parse_scalar<int>(v, line, key); }},
        {"replicates",
         [&](auto v, auto line, auto key) { cfg.replicates = parse_scalar<int>(v, line, key); }},
        {"seed", [&](auto v, auto line, auto key) { cfg.seed = parse_scalar<std::uint64_t>(v, line, key); }},
        {"lambda_mode", [&](auto v, auto line, auto key) {
             const auto m = parse_lambda_mode(v);
             if (!m) fail(line, key, "expected oracle, plugin or crossfit");
             cfg.lambda_mode = *m;
         }},
        {"folds", [&](auto v, auto line, auto key) { cfg.folds = parse_scalar<int>(v, line, key); }},
        {"outcome_dist", [&](auto v, auto line, auto key) {
             const auto d = parse_outcome_dist(v);
             if (!d) fail(line, key, "expected gaussian, t5, lognormal or bernoulli");
             cfg.outcome_dist = *d;
         }},
        {"alpha", [&](auto v, auto line, auto key) { cfg.alpha = parse_scalar<double>(v, line, key); }},
        {"null_runs", [&](auto v, auto line, auto key) { cfg.null_runs = parse_bool(v, line, key); }},
        {"null_replicates",
         [&](auto v, auto line, auto key) { cfg.null_replicates = parse_scalar<int>(v, line, key); }},
        {"threads", [&](auto v, auto line, auto key) { cfg.threads = parse_scalar<int>(v, line, key); }},
        {"reference_samples",
         [&](auto v, auto line, auto key) { cfg.reference_samples = parse_scalar<int>(v, line, key); }},
        {"within_pair_corr",
         [&](auto v, auto line, auto key) { cfg.within_pair_corr = parse_scalar<double>(v, line, key); }},
    };

    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find('\n', start);
        std::string_view line = text.substr(start, end == std::string_view::npos ? end : end - start);
        start = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) fail(line_no, line, "expected key = value");
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) fail(line_no, key, "unknown key");
        it->second(value, line_no, key);
    }
    cfg.validate();
    return cfg;
}

SimConfig SimConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::config, "cannot open config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

void SimConfig::validate() const {
    auto check = [](bool ok, const char* msg) {
        if (!ok) throw Error(ErrorCode::config, msg);
    };
    const bool binary = is_binary(design);
    check(replicates >= 1, "replicates must be at least 1");
    check(null_replicates >= 0, "null_replicates must be nonnegative");
    check(!(binary ? accuracy : rho).empty(), binary ? "accuracy grid is empty" : "rho grid is empty");
    check(!N.empty(), "N grid is empty");
    check(!delta.empty() && !p_treat.empty(), "effect grid is empty");
    check(lambda_mode != LambdaMode::crossfit || folds >= 2, "crossfit needs folds >= 2");
    check(reference_samples >= 10000, "reference_samples must be at least 10000");
    check(threads >= 0, "threads must be nonnegative");
    switch (experiment) {
        case Experiment::grid:
            check(!n.empty(), "n grid is empty");
            break;
        case Experiment::inversion_check:
            check(!target_power.empty(), "target_power grid is empty");
            break;
        case Experiment::misspecified_rho:
            check(!target_power.empty() && !rho_shift.empty(), "rho_shift grid is empty");
            break;
        case Experiment::unequal_groups:
            check(design == Design::two_sample_cont || design == Design::two_sample_bin,
                  "unequal_groups needs a two-sample design");
            check(!allocation.empty(), "allocation grid is empty");
            for (double k : allocation) check(k > 0.0, "allocation ratios must be positive");
            check(n_total >= 4 && N_total >= 2, "totals too small to split");
            break;
    }
    for (double tp : target_power) check(tp > 0.0 && tp < 1.0, "target_power must lie in (0, 1)");
}

}  // namespace ppipower::sim
