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

#include "ppipower/calibration.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <string>

namespace ppipower {

namespace {

bool is_probability(double x) { return x >= 0.0 && x <= 1.0; }

double mean_of(std::span<const double> v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
}

struct SampleMoments {
    double var_y, var_f, cov;
};

// Two-pass centered moments with n - 1 denominator.
SampleMoments sample_moments(std::span<const double> y, std::span<const double> f) {
    if (y.size() != f.size()) {
        throw Error(ErrorCode::invalid_argument, "y and f must have the same length");
    }
    if (y.size() < 2) {
        throw Error(ErrorCode::invalid_argument, "at least two pairs are required");
    }
    const double my = mean_of(y);
    const double mf = mean_of(f);
    double syy = 0.0, sff = 0.0, syf = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double dy = y[i] - my;
        const double df = f[i] - mf;
        syy += dy * dy;
        sff += df * df;
        syf += dy * df;
    }
    const double denom = static_cast<double>(y.size() - 1);
    return {syy / denom, sff / denom, syf / denom};
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_number(std::string_view field, std::size_t line_no, const char* column) {
    const std::string text(field);
    char* end = nullptr;
    errno = 0;
    const double value = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(value)) {
        throw Error(ErrorCode::parse, "line " + std::to_string(line_no) + ": column '" + column +
                                          "' is not a finite number: '" + text + "'");
    }
    return value;
}

}  // namespace

MomentSet MomentSet::from_covariance(double var_y, double var_f, double cov_yf, bool conservative) {
    if (!std::isfinite(var_y) || !std::isfinite(var_f) || !std::isfinite(cov_yf)) {
        throw Error(ErrorCode::invalid_argument, "moments must be finite");
    }
    if (var_y < 0.0 || var_f < 0.0) {
        throw Error(ErrorCode::invalid_argument, "variances must be nonnegative");
    }
    const double bound = var_y * var_f;
    if (cov_yf * cov_yf > bound * (1.0 + 1e-12) + 1e-300) {
        throw Error(ErrorCode::invalid_argument,
                    "covariance violates Cauchy-Schwarz: cov^2 > var_y * var_f");
    }
    return MomentSet{var_y, var_f, cov_yf, conservative};
}

double MomentSet::rho() const {
    if (var_y <= 0.0 || var_f <= 0.0) return 0.0;
    return std::clamp(cov_yf / std::sqrt(var_y * var_f), -1.0, 1.0);
}

double MomentSet::rho2() const {
    const double r = rho();
    return r * r;
}

double MomentSet::var_eps() const { return std::max(0.0, var_y + var_f - 2.0 * cov_yf); }

PilotSample PilotSample::subset(std::string_view label) const {
    if (group.size() != y.size()) {
        throw Error(ErrorCode::invalid_argument, "pilot sample carries no group labels");
    }
    PilotSample out;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (group[i] == label) {
            out.y.push_back(y[i]);
            out.f.push_back(f[i]);
            out.group.push_back(group[i]);
        }
    }
    return out;
}

MomentSet calibrate_binary(const BinaryMetrics& m) {
    if (!is_probability(m.prevalence) || !is_probability(m.sensitivity) ||
        !is_probability(m.specificity)) {
        throw Error(ErrorCode::invalid_argument, "prevalence, sensitivity and specificity must lie in [0, 1]");
    }
    if (m.prevalence == 0.0 || m.prevalence == 1.0) {
        throw Error(ErrorCode::degenerate, "prevalence 0 or 1 gives zero outcome variance");
    }
    const double p = m.prevalence;
    const double p_f = m.sensitivity * p + (1.0 - m.specificity) * (1.0 - p);
    const double var_y = p * (1.0 - p);
    const double var_f = p_f * (1.0 - p_f);
    // cov = se p - p p_f = p (1 - p)(se + sp - 1); the factored form is exactly
    // zero when se + sp = 1.
    const double cov = var_y * (m.sensitivity + m.specificity - 1.0);
    return MomentSet::from_covariance(var_y, var_f, cov);
}

MomentSet calibrate_r2(double var_y, double r2) {
    if (!(var_y > 0.0) || !std::isfinite(var_y)) {
        throw Error(ErrorCode::invalid_argument, "outcome variance must be positive");
    }
    if (!(r2 >= 0.0 && r2 <= 1.0)) {
        throw Error(ErrorCode::invalid_argument, "R^2 must lie in [0, 1]");
    }
    return MomentSet::from_covariance(var_y, var_y, var_y * std::sqrt(r2));
}

MomentSet calibrate_mse(double var_y, double mse) {
    if (!(var_y > 0.0) || !std::isfinite(var_y)) {
        throw Error(ErrorCode::invalid_argument, "outcome variance must be positive");
    }
    if (!(mse >= 0.0) || !std::isfinite(mse)) {
        throw Error(ErrorCode::invalid_argument, "MSE must be nonnegative");
    }
    const double r2 = std::max(0.0, 1.0 - mse / var_y);
    return MomentSet::from_covariance(var_y, var_y, var_y * std::sqrt(r2), true);
}

MomentSet estimate_moments(const PilotSample& pilot) {
    const auto s = sample_moments(pilot.y, pilot.f);
    if (s.var_y == 0.0) throw Error(ErrorCode::degenerate, "column 'y' is constant in the pilot sample");
    if (s.var_f == 0.0) throw Error(ErrorCode::degenerate, "column 'f' is constant in the pilot sample");
    // Rounding can push a perfectly correlated sample marginally past the bound.
    const double limit = std::sqrt(s.var_y * s.var_f);
    return MomentSet::from_covariance(s.var_y, s.var_f, std::clamp(s.cov, -limit, limit));
}

LambdaEstimate plugin_lambda(std::span<const double> y, std::span<const double> f, double r) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
        throw Error(ErrorCode::invalid_argument, "ratio r must be finite and nonnegative");
    }
    const auto s = sample_moments(y, f);
    if (s.var_y == 0.0) throw Error(ErrorCode::degenerate, "column 'y' is constant in the pilot sample");
    if (s.var_f == 0.0) return {0.0, Warning::zero_prediction_variance};
    return {s.cov / ((1.0 + r) * s.var_f), Warning::none};
}

LambdaEstimate plugin_lambda(const PilotSample& pilot, double r, std::optional<LambdaClamp> clamp) {
    auto est = plugin_lambda(std::span<const double>(pilot.y), std::span<const double>(pilot.f), r);
    if (clamp) {
        if (clamp->lower > clamp->upper) {
            throw Error(ErrorCode::invalid_argument, "lambda clamp range is empty");
        }
        est.value = std::clamp(est.value, clamp->lower, clamp->upper);
    }
    return est;
}

PilotSample parse_pilot_csv(std::string_view text) {
    PilotSample pilot;
    std::size_t line_no = 0;
    bool header_seen = false;
    bool has_group = false;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find('\n', start);
        const auto raw = text.substr(start, end == std::string_view::npos ? end : end - start);
        start = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        const auto line = trim(raw);
        if (line.empty()) continue;

        const auto fields = split_commas(line);
        if (!header_seen) {
            if (fields.size() == 2 && fields[0] == "y" && fields[1] == "f") {
                has_group = false;
            } else if (fields.size() == 3 && fields[0] == "y" && fields[1] == "f" && fields[2] == "group") {
                has_group = true;
            } else {
                throw Error(ErrorCode::parse, "line " + std::to_string(line_no) +
                                                  ": expected header 'y,f' or 'y,f,group'");
            }
            header_seen = true;
            continue;
        }
        const std::size_t expected = has_group ? 3 : 2;
        if (fields.size() != expected) {
            throw Error(ErrorCode::parse, "line " + std::to_string(line_no) + ": expected " +
                                              std::to_string(expected) + " fields, found " +
                                              std::to_string(fields.size()));
        }
        pilot.y.push_back(parse_number(fields[0], line_no, "y"));
        pilot.f.push_back(parse_number(fields[1], line_no, "f"));
        if (has_group) pilot.group.emplace_back(fields[2]);
    }
    if (!header_seen) throw Error(ErrorCode::parse, "empty pilot file: missing header 'y,f'");
    return pilot;
}

}  // namespace ppipower
