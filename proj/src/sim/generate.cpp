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

#include "ppipower/sim/generate.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "ppipower/error.hpp"
#include "ppipower/normal.hpp"

namespace ppipower::sim {

namespace {

constexpr std::array<std::string_view, 10> kDesignNames = {
    "one_sample_cont", "one_sample_bin", "two_sample_cont", "two_sample_bin", "paired_cont",
    "paired_bin",      "two_by_two_rr",  "two_by_two_or",   "ols_contrast",   "logistic_contrast",
};
constexpr std::array<std::string_view, 4> kDistNames = {"gaussian", "t5", "lognormal", "bernoulli"};
constexpr std::array<std::string_view, 5> kModeNames = {"oracle", "plugin", "crossfit", "classical",
                                                         "vanilla"};

template <typename E, std::size_t K>
std::optional<E> lookup(const std::array<std::string_view, K>& names, std::string_view s) {
    for (std::size_t i = 0; i < K; ++i) {
        if (names[i] == s) return static_cast<E>(i);
    }
    return std::nullopt;
}

void config_check(bool ok, const char* message) {
    if (!ok) throw Error(ErrorCode::config, message);
}

// Zero-mean, unit-variance draw from the outcome error law.
double standardized_error(OutcomeDist dist, Rng& rng) {
    switch (dist) {
        case OutcomeDist::t5:
            return rng.student_t5() / std::sqrt(5.0 / 3.0);
        case OutcomeDist::lognormal: {
            const double e = std::numbers::e;
            return (std::exp(rng.normal()) - std::sqrt(e)) / std::sqrt((e - 1.0) * e);
        }
        default:
            return rng.normal();
    }
}

double classify(bool y, double accuracy, Rng& rng) {
    const bool correct = rng.bernoulli(accuracy);
    return (y == correct) ? 1.0 : 0.0;
}

double shifted_prob(const CellSpec& c) { return c.p_base + (c.null_effect ? 0.0 : c.delta); }

double effect_of(const CellSpec& c) { return c.null_effect ? 0.0 : c.delta; }

// Continuous (Y, f) pairs with Corr = rho and unit variances around `mean`.
void continuous_block(const CellSpec& c, double mean, int n, int N, MeanSample& out, Rng& rng) {
    const double tail = std::sqrt(1.0 - c.rho * c.rho);
    out.y.resize(static_cast<std::size_t>(n));
    out.f.resize(static_cast<std::size_t>(n));
    out.f_unlabeled.resize(static_cast<std::size_t>(N));
    for (int i = 0; i < n; ++i) {
        const double e1 = standardized_error(c.dist, rng);
        const double e2 = standardized_error(c.dist, rng);
        out.y[i] = mean + e1;
        out.f[i] = mean + c.rho * e1 + tail * e2;
    }
    for (int j = 0; j < N; ++j) {
        const double e1 = standardized_error(c.dist, rng);
        const double e2 = standardized_error(c.dist, rng);
        out.f_unlabeled[j] = mean + c.rho * e1 + tail * e2;
    }
}

void binary_block(double p, double accuracy, int n, int N, MeanSample& out, Rng& rng) {
    out.y.resize(static_cast<std::size_t>(n));
    out.f.resize(static_cast<std::size_t>(n));
    out.f_unlabeled.resize(static_cast<std::size_t>(N));
    for (int i = 0; i < n; ++i) {
        const bool y = rng.bernoulli(p);
        out.y[i] = y ? 1.0 : 0.0;
        out.f[i] = classify(y, accuracy, rng);
    }
    for (int j = 0; j < N; ++j) out.f_unlabeled[j] = classify(rng.bernoulli(p), accuracy, rng);
}

// Paired continuous: both outcome and prediction errors share correlation c
// within a pair and each member is scaled so that (D, G) has unit variances
// and correlation rho.
MeanSample paired_continuous(const CellSpec& c, Rng& rng) {
    const double wc = c.within_pair_corr;
    const double scale = 1.0 / std::sqrt(2.0 * (1.0 - wc));
    const double tail = std::sqrt(1.0 - c.rho * c.rho);
    const double mix = std::sqrt(1.0 - wc * wc);
    auto pair = [&](double& d, double& g) {
        const double ea = rng.normal();
        const double eb = wc * ea + mix * rng.normal();
        const double ha = rng.normal();
        const double hb = wc * ha + mix * rng.normal();
        const double ya = scale * ea;
        const double yb = effect_of(c) + scale * eb;
        const double fa = scale * (c.rho * ea + tail * ha);
        const double fb = effect_of(c) + scale * (c.rho * eb + tail * hb);
        d = yb - ya;
        g = fb - fa;
    };
    MeanSample s;
    s.y.resize(static_cast<std::size_t>(c.n));
    s.f.resize(static_cast<std::size_t>(c.n));
    s.f_unlabeled.resize(static_cast<std::size_t>(c.N));
    for (int i = 0; i < c.n; ++i) pair(s.y[i], s.f[i]);
    double unused = 0.0;
    for (int j = 0; j < c.N; ++j) pair(unused, s.f_unlabeled[j]);
    return s;
}

MeanSample paired_binary(const CellSpec& c, double latent, Rng& rng) {
    const double pa = c.p_base;
    const double pb = shifted_prob(c);
    const double za = normal_quantile(pa);
    const double zb = normal_quantile(pb);
    const double mix = std::sqrt(1.0 - latent * latent);
    auto pair = [&](double& d, double& g) {
        const double la = rng.normal();
        const double lb = latent * la + mix * rng.normal();
        const bool ya = la <= za;
        const bool yb = lb <= zb;
        d = static_cast<double>(yb) - static_cast<double>(ya);
        g = classify(yb, c.accuracy, rng) - classify(ya, c.accuracy, rng);
    };
    MeanSample s;
    s.y.resize(static_cast<std::size_t>(c.n));
    s.f.resize(static_cast<std::size_t>(c.n));
    s.f_unlabeled.resize(static_cast<std::size_t>(c.N));
    for (int i = 0; i < c.n; ++i) pair(s.y[i], s.f[i]);
    double unused = 0.0;
    for (int j = 0; j < c.N; ++j) pair(unused, s.f_unlabeled[j]);
    return s;
}

RegressionSample regression(const CellSpec& c, Rng& rng) {
    const bool logistic = c.design == Design::logistic_contrast;
    const double b1 = effect_of(c);
    const double tail = std::sqrt(1.0 - c.rho * c.rho);
    RegressionSample s;
    s.x.resize(c.n, 2);
    s.y.resize(c.n);
    s.f.resize(c.n);
    s.x_unlabeled.resize(c.N, 2);
    s.f_unlabeled.resize(c.N);
    // Returns (y, f) for one covariate row.
    auto draw = [&](double x1) -> std::pair<double, double> {
        const double mean = b1 * x1;
        if (logistic) {
            const bool y = rng.bernoulli(1.0 / (1.0 + std::exp(-mean)));
            return {y ? 1.0 : 0.0, classify(y, c.accuracy, rng)};
        }
        const double eps = rng.normal();
        return {mean + eps, mean + c.rho * eps + tail * rng.normal()};
    };
    for (int i = 0; i < c.n; ++i) {
        s.x(i, 0) = rng.normal();
        s.x(i, 1) = rng.normal();
        std::tie(s.y(i), s.f(i)) = draw(s.x(i, 0));
    }
    for (int j = 0; j < c.N; ++j) {
        s.x_unlabeled(j, 0) = rng.normal();
        s.x_unlabeled(j, 1) = rng.normal();
        s.f_unlabeled(j) = draw(s.x_unlabeled(j, 0)).second;
    }
    return s;
}

double bernoulli_corr(double pa, double pb, double joint) {
    return (joint - pa * pb) / std::sqrt(pa * (1.0 - pa) * pb * (1.0 - pb));
}

}  // namespace

std::string_view to_string(Design d) { return kDesignNames[static_cast<std::size_t>(d)]; }
std::string_view to_string(OutcomeDist d) { return kDistNames[static_cast<std::size_t>(d)]; }
std::string_view to_string(LambdaMode m) { return kModeNames[static_cast<std::size_t>(m)]; }

std::optional<Design> parse_design(std::string_view s) { return lookup<Design>(kDesignNames, s); }
std::optional<OutcomeDist> parse_outcome_dist(std::string_view s) {
    return lookup<OutcomeDist>(kDistNames, s);
}
std::optional<LambdaMode> parse_lambda_mode(std::string_view s) {
    return lookup<LambdaMode>(kModeNames, s);
}

bool is_binary(Design d) {
    switch (d) {
        case Design::one_sample_bin:
        case Design::two_sample_bin:
        case Design::paired_bin:
        case Design::two_by_two_rr:
        case Design::two_by_two_or:
        case Design::logistic_contrast:
            return true;
        default:
            return false;
    }
}

bool is_two_group(Design d) {
    return d == Design::two_sample_cont || d == Design::two_sample_bin ||
           d == Design::two_by_two_rr || d == Design::two_by_two_or;
}

bool is_regression(Design d) {
    return d == Design::ols_contrast || d == Design::logistic_contrast;
}

void CellSpec::validate() const {
    config_check(n >= 2 && N >= 1, "n must be at least 2 and N at least 1");
    config_check(n_other == 0 || n_other >= 2, "n_other must be at least 2");
    config_check(N_other >= 0, "N_other must be nonnegative");
    config_check(replicates >= 1, "replicates must be at least 1");
    config_check(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    config_check(std::isfinite(delta), "delta must be finite");
    config_check(lambda_mode != LambdaMode::crossfit || folds >= 2, "crossfit needs at least 2 folds");
    config_check(lambda_mode != LambdaMode::crossfit || n >= 2 * folds,
                 "crossfit folds would hold fewer than two labeled points");
    if (is_binary(design)) {
        config_check(accuracy >= 0.5 && accuracy <= 1.0, "accuracy must lie in [0.5, 1]");
        config_check(dist == OutcomeDist::bernoulli || dist == OutcomeDist::gaussian,
                     "binary designs take bernoulli outcomes");
    } else {
        config_check(rho >= 0.0 && rho < 1.0, "rho must lie in [0, 1)");
    }
    const bool probability_design = design == Design::one_sample_bin ||
                                    design == Design::two_sample_bin ||
                                    design == Design::paired_bin;
    if (probability_design) {
        const double p = p_base + (null_effect ? 0.0 : delta);
        config_check(p_base > 0.0 && p_base < 1.0 && p > 0.0 && p < 1.0,
                     "binary success probabilities must lie in (0, 1)");
    }
    if (design == Design::two_by_two_rr || design == Design::two_by_two_or) {
        config_check(p_base > 0.0 && p_base < 1.0 && p_treat > 0.0 && p_treat < 1.0,
                     "2x2 probabilities must lie in (0, 1)");
    }
    if (design == Design::paired_bin || design == Design::paired_cont) {
        config_check(within_pair_corr > -1.0 && within_pair_corr < 1.0,
                     "within_pair_corr must lie in (-1, 1)");
    }
    if (dist != OutcomeDist::gaussian && dist != OutcomeDist::bernoulli) {
        config_check(design == Design::one_sample_cont || design == Design::two_sample_cont,
                     "t5 and lognormal outcomes apply to one- and two-sample continuous designs");
    }
}

Dataset generate(const CellSpec& cell, Rng& rng) {
    cell.validate();
    CellTruth truth;
    if (cell.design == Design::paired_bin) {
        truth.latent_corr = latent_correlation(cell.p_base, shifted_prob(cell), cell.within_pair_corr);
    }
    return generate(cell, truth, rng);
}

Dataset generate(const CellSpec& cell, const CellTruth& truth, Rng& rng) {
    switch (cell.design) {
        case Design::one_sample_cont: {
            MeanSample s;
            continuous_block(cell, effect_of(cell), cell.n, cell.N, s, rng);
            return s;
        }
        case Design::one_sample_bin: {
            MeanSample s;
            binary_block(shifted_prob(cell), cell.accuracy, cell.n, cell.N, s, rng);
            return s;
        }
        case Design::two_sample_cont: {
            TwoGroupSample s;
            continuous_block(cell, 0.0, cell.n, cell.N, s.a, rng);
            continuous_block(cell, effect_of(cell), cell.group_b_n(), cell.group_b_N(), s.b, rng);
            return s;
        }
        case Design::two_sample_bin: {
            TwoGroupSample s;
            binary_block(cell.p_base, cell.accuracy, cell.n, cell.N, s.a, rng);
            binary_block(shifted_prob(cell), cell.accuracy, cell.group_b_n(), cell.group_b_N(), s.b,
                         rng);
            return s;
        }
        case Design::two_by_two_rr:
        case Design::two_by_two_or: {
            TwoGroupSample s;
            const double p1 = cell.null_effect ? cell.p_base : cell.p_treat;
            binary_block(cell.p_base, cell.accuracy, cell.n, cell.N, s.a, rng);
            binary_block(p1, cell.accuracy, cell.group_b_n(), cell.group_b_N(), s.b, rng);
            return s;
        }
        case Design::paired_cont:
            return paired_continuous(cell, rng);
        case Design::paired_bin:
            return paired_binary(cell, truth.latent_corr, rng);
        case Design::ols_contrast:
        case Design::logistic_contrast:
            return regression(cell, rng);
    }
    throw Error(ErrorCode::config, "unknown design");
}

double bivariate_normal_cdf(double a, double b, double r) {
    if (!(r > -1.0 && r < 1.0)) throw Error(ErrorCode::domain, "correlation must lie in (-1, 1)");
    // Plackett's identity: d/dr Phi2 equals the bivariate density at (a, b).
    auto density = [a, b](double t) {
        const double q = 1.0 - t * t;
        return std::exp(-(a * a - 2.0 * t * a * b + b * b) / (2.0 * q)) /
               (2.0 * std::numbers::pi * std::sqrt(q));
    };
    const double integral =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(density, 0.0, r, 15, 1e-14);
    return normal_cdf(a) * normal_cdf(b) + integral;
}

double latent_correlation(double p_a, double p_b, double target) {
    const double za = normal_quantile(p_a);
    const double zb = normal_quantile(p_b);
    auto gap = [&](double r) { return bernoulli_corr(p_a, p_b, bivariate_normal_cdf(za, zb, r)) - target; };
    constexpr double edge = 0.999999;
    if (gap(-edge) > 0.0 || gap(edge) < 0.0) {
        throw Error(ErrorCode::config, "within-pair correlation is not attainable at these prevalences");
    }
    boost::math::tools::eps_tolerance<double> tol(50);
    const auto [lo, hi] = boost::math::tools::bisect(gap, -edge, edge, tol);
    return 0.5 * (lo + hi);
}

MomentSet paired_binary_moments(double p_a, double p_b, double latent_corr, double accuracy) {
    const double p11 = bivariate_normal_cdf(normal_quantile(p_a), normal_quantile(p_b), latent_corr);
    const double joint[2][2] = {{1.0 - p_a - p_b + p11, p_b - p11}, {p_a - p11, p11}};
    // P(f = 1 | y) for the symmetric classifier.
    const double pf[2] = {1.0 - accuracy, accuracy};
    double ed = 0, eg = 0, edd = 0, egg = 0, edg = 0;
    for (int ya = 0; ya < 2; ++ya) {
        for (int yb = 0; yb < 2; ++yb) {
            const double w = joint[ya][yb];
            const double d = yb - ya;
            const double g = pf[yb] - pf[ya];
            // Var(fb - fa | ya, yb) from independent classifier noise.
            const double noise = pf[ya] * (1 - pf[ya]) + pf[yb] * (1 - pf[yb]);
            ed += w * d;
            eg += w * g;
            edd += w * d * d;
            egg += w * (g * g + noise);
            edg += w * d * g;
        }
    }
    return MomentSet::from_covariance(edd - ed * ed, egg - eg * eg, edg - ed * eg);
}

CellTruth cell_truth(const CellSpec& cell) {
    cell.validate();
    CellTruth t;
    const auto gaussian = MomentSet::from_covariance(1.0, 1.0, cell.rho);
    auto binary = [&](double p) {
        return calibrate_binary({.prevalence = p, .sensitivity = cell.accuracy, .specificity = cell.accuracy});
    };
    t.effect = effect_of(cell);
    switch (cell.design) {
        case Design::one_sample_cont:
        case Design::paired_cont:
            t.a = gaussian;
            break;
        case Design::two_sample_cont:
            t.a = t.b = gaussian;
            break;
        case Design::one_sample_bin:
            t.a = binary(shifted_prob(cell));
            break;
        case Design::two_sample_bin:
            t.a = binary(cell.p_base);
            t.b = binary(shifted_prob(cell));
            break;
        case Design::paired_bin:
            t.latent_corr = latent_correlation(cell.p_base, shifted_prob(cell), cell.within_pair_corr);
            t.a = paired_binary_moments(cell.p_base, shifted_prob(cell), t.latent_corr, cell.accuracy);
            break;
        case Design::two_by_two_rr:
        case Design::two_by_two_or: {
            const double p1 = cell.null_effect ? cell.p_base : cell.p_treat;
            t.a = binary(cell.p_base);
            t.b = binary(p1);
            t.table = {.p0 = cell.p_base,
                       .p1 = p1,
                       .rho0 = t.a.rho(),
                       .rho1 = t.b.rho(),
                       .kappa = static_cast<double>(cell.group_b_n()) / cell.n,
                       .measure = cell.design == Design::two_by_two_rr ? RiskMeasure::relative_risk
                                                                       : RiskMeasure::odds_ratio};
            t.effect = t.table.log_effect();
            break;
        }
        case Design::ols_contrast:
            t.blocks = {.v_yy = 2.0, .v_ff = 2.0, .v_yf = 2.0 * cell.rho};
            break;
        case Design::logistic_contrast:
            break;
    }
    return t;
}

Eigen::Vector2d contrast_vector() { return {1.0, -1.0}; }

}  // namespace ppipower::sim
