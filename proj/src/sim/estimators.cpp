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

#include "ppipower/sim/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ppipower/calibration.hpp"
#include "ppipower/error.hpp"
#include "ppipower/normal.hpp"

namespace ppipower::sim {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return ss / static_cast<double>(v.size() - 1);
}

double expit(double t) { return 1.0 / (1.0 + std::exp(-t)); }

// Mean function and working weight per row.
void mean_and_weight(const MatrixXd& x, const VectorXd& beta, Link link, VectorXd& mu, VectorXd& w) {
    mu = x * beta;
    w.resize(mu.size());
    if (link == Link::identity) {
        w.setOnes();
        return;
    }
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
        mu(i) = expit(mu(i));
        w(i) = mu(i) * (1.0 - mu(i));
    }
}

// The labeled/unlabeled blocks of one rectified problem, held by reference
// so fold subsets can be passed without rebuilding a RegressionSample.
struct Problem {
    const MatrixXd& x;
    const VectorXd& y;
    const VectorXd& f;
    const MatrixXd& xu;
    const VectorXd& fu;
};

struct ScoreState {
    VectorXd score;
    MatrixXd hessian;  // H = (1 - lambda)/n X'WX + lambda/N Xu'WuXu
};

ScoreState rectified_score(const Problem& p, const VectorXd& beta, double lambda, Link link) {
    VectorXd mu, w, mu_u, w_u;
    mean_and_weight(p.x, beta, link, mu, w);
    mean_and_weight(p.xu, beta, link, mu_u, w_u);
    const double n = static_cast<double>(p.x.rows());
    const double N = static_cast<double>(p.xu.rows());
    ScoreState st;
    st.score = p.x.transpose() * (p.y - lambda * p.f - (1.0 - lambda) * mu) / n +
               lambda * p.xu.transpose() * (p.fu - mu_u) / N;
    st.hessian = (1.0 - lambda) / n * (p.x.transpose() * w.asDiagonal() * p.x) +
                 lambda / N * (p.xu.transpose() * w_u.asDiagonal() * p.xu);
    return st;
}

LogisticFit solve_logistic(const Problem& p, double lambda, int max_iter, double tol) {
    LogisticFit fit;
    fit.beta = VectorXd::Zero(p.x.cols());
    ScoreState st = rectified_score(p, fit.beta, lambda, Link::logit);
    for (fit.iterations = 0; fit.iterations < max_iter; ++fit.iterations) {
        const double size = st.score.cwiseAbs().maxCoeff();
        if (size < tol) {
            fit.converged = true;
            return fit;
        }
        Eigen::FullPivLU<MatrixXd> lu(st.hessian);
        if (!lu.isInvertible()) return fit;
        const VectorXd step = lu.solve(st.score);
        bool accepted = false;
        for (double t = 1.0; t > 1e-10; t *= 0.5) {
            const VectorXd trial = fit.beta + t * step;
            ScoreState next = rectified_score(p, trial, lambda, Link::logit);
            if (next.score.allFinite() && next.score.cwiseAbs().maxCoeff() < size) {
                fit.beta = trial;
                st = std::move(next);
                accepted = true;
                break;
            }
        }
        if (!accepted) return fit;
    }
    fit.converged = st.score.cwiseAbs().maxCoeff() < tol;
    return fit;
}

// Sample covariance of the rows of `m` (each row one observation).
MatrixXd row_covariance(const MatrixXd& m) {
    const VectorXd center = m.colwise().mean();
    const MatrixXd c = m.rowwise() - center.transpose();
    const double denom = std::max<double>(1.0, static_cast<double>(m.rows() - 1));
    return c.transpose() * c / denom;
}

}  // namespace

MeanFit ppi_mean(const MeanSample& s, double lambda) {
    const std::size_t n = s.y.size();
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i) resid[i] = s.y[i] - lambda * s.f[i];
    MeanFit fit;
    fit.estimate = mean_of(s.y) + lambda * (mean_of(s.f_unlabeled) - mean_of(s.f));
    fit.variance = sample_variance(resid) / static_cast<double>(n) +
                   lambda * lambda * sample_variance(s.f_unlabeled) /
                       static_cast<double>(s.f_unlabeled.size());
    return fit;
}

WaldOutcome wald_test(double estimate, double variance, double theta0, double alpha) {
    WaldOutcome out;
    if (!(variance > 0.0) || !std::isfinite(variance) || !std::isfinite(estimate)) {
        out.degenerate = true;
        return out;
    }
    out.z = (estimate - theta0) / std::sqrt(variance);
    out.reject = std::abs(out.z) > normal_quantile(1.0 - alpha / 2.0);
    return out;
}

VectorXd rectified_ols_solve(const RegressionSample& s, double lambda) {
    const Problem p{s.x, s.y, s.f, s.x_unlabeled, s.f_unlabeled};
    // The score is affine in beta: score(beta) = score(0) - H beta.
    const ScoreState at_zero = rectified_score(p, VectorXd::Zero(s.x.cols()), lambda, Link::identity);
    Eigen::FullPivLU<MatrixXd> lu(at_zero.hessian);
    if (!lu.isInvertible()) {
        throw Error(ErrorCode::singular, "rectified normal equations are rank deficient");
    }
    return lu.solve(at_zero.score);
}

LogisticFit rectified_logistic_solve(const RegressionSample& s, double lambda, int max_iter,
                                     double tol) {
    return solve_logistic({s.x, s.y, s.f, s.x_unlabeled, s.f_unlabeled}, lambda, max_iter, tol);
}

double sandwich_se(const RegressionSample& s, Link link, const VectorXd& beta, double lambda,
                   const VectorXd& a) {
    const Problem p{s.x, s.y, s.f, s.x_unlabeled, s.f_unlabeled};
    const ScoreState st = rectified_score(p, beta, lambda, link);
    VectorXd mu, w, mu_u, w_u;
    mean_and_weight(s.x, beta, link, mu, w);
    mean_and_weight(s.x_unlabeled, beta, link, mu_u, w_u);
    const MatrixXd psi = s.x.array().colwise() * ((s.y - mu) - lambda * (s.f - mu)).array();
    const MatrixXd psi_u = s.x_unlabeled.array().colwise() * (s.f_unlabeled - mu_u).array();
    const double n = static_cast<double>(s.x.rows());
    const double N = static_cast<double>(s.x_unlabeled.rows());
    const MatrixXd meat = row_covariance(psi) / n + lambda * lambda * row_covariance(psi_u) / N;
    Eigen::FullPivLU<MatrixXd> lu(st.hessian);
    if (!lu.isInvertible()) throw Error(ErrorCode::singular, "sandwich bread is singular");
    const VectorXd g = lu.transpose().solve(a);
    return std::sqrt(std::max(0.0, g.dot(meat * g)));
}

ContrastBlocks score_blocks(const MatrixXd& x, const VectorXd& y, const VectorXd& f, Link link,
                            const VectorXd& beta, const VectorXd& a) {
    VectorXd mu, w;
    mean_and_weight(x, beta, link, mu, w);
    const MatrixXd j = x.transpose() * w.asDiagonal() * x / static_cast<double>(x.rows());
    Eigen::FullPivLU<MatrixXd> lu(j);
    if (!lu.isInvertible()) throw Error(ErrorCode::singular, "information matrix is singular");
    const VectorXd g = lu.transpose().solve(a);
    const VectorXd proj = x * g;
    const VectorXd u = proj.array() * (y - mu).array();
    const VectorXd v = proj.array() * (f - mu).array();
    const double mu_u = u.mean();
    const double mu_v = v.mean();
    const double denom = static_cast<double>(x.rows() - 1);
    ContrastBlocks c;
    c.v_yy = (u.array() - mu_u).square().sum() / denom;
    c.v_ff = (v.array() - mu_v).square().sum() / denom;
    c.v_yf = ((u.array() - mu_u) * (v.array() - mu_v)).sum() / denom;
    return c;
}

ContrastBlocks glm_reference_blocks(const CellSpec& cell, int M, Rng& rng) {
    if (!is_regression(cell.design)) {
        throw Error(ErrorCode::config, "reference blocks need a regression design");
    }
    if (M < 10000) throw Error(ErrorCode::config, "reference sample must hold at least 10000 rows");
    CellSpec big = cell;
    big.n = M;
    big.N = 1;
    big.lambda_mode = LambdaMode::oracle;
    const auto sample = std::get<RegressionSample>(generate(big, rng));
    VectorXd beta(2);
    beta << (cell.null_effect ? 0.0 : cell.delta), 0.0;
    const Link link = cell.design == Design::logistic_contrast ? Link::logit : Link::identity;
    return score_blocks(sample.x, sample.y, sample.f, link, beta, contrast_vector());
}

std::vector<int> make_folds(std::size_t n, int K, Rng& rng) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng.engine());
    std::vector<int> fold(n);
    for (std::size_t i = 0; i < n; ++i) fold[order[i]] = static_cast<int>(i % static_cast<std::size_t>(K));
    return fold;
}

double crossfit_lambda(std::size_t n, int K, double r, Rng& rng, const FoldScorer& scorer) {
    if (K < 2) throw Error(ErrorCode::config, "cross-fitting needs at least 2 folds");
    if (n < 2 * static_cast<std::size_t>(K)) {
        throw Error(ErrorCode::config, "cross-fitting folds would hold fewer than two labeled points");
    }
    const std::vector<int> fold = make_folds(n, K, rng);
    std::vector<double> u(n), v(n);
    for (int k = 0; k < K; ++k) {
        std::vector<std::size_t> train, test;
        for (std::size_t i = 0; i < n; ++i) (fold[i] == k ? test : train).push_back(i);
        std::vector<double> fu, fv;
        scorer(train, test, fu, fv);
        for (std::size_t t = 0; t < test.size(); ++t) {
            u[test[t]] = fu[t];
            v[test[t]] = fv[t];
        }
    }
    return plugin_lambda(std::span<const double>(u), std::span<const double>(v), r).value;
}

double crossfit_lambda(std::span<const double> y, std::span<const double> f, int K, double r,
                       Rng& rng) {
    auto identity = [&](const std::vector<std::size_t>&, const std::vector<std::size_t>& test,
                        std::vector<double>& u, std::vector<double>& v) {
        for (std::size_t i : test) {
            u.push_back(y[i]);
            v.push_back(f[i]);
        }
    };
    return crossfit_lambda(y.size(), K, r, rng, identity);
}

namespace {

// Out-of-sample contrast scores for `test` rows from a preliminary fit on
// `train` rows plus the unlabeled block.
void contrast_scores(const RegressionSample& s, Link link, const VectorXd& a,
                     const std::vector<std::size_t>& train, const std::vector<std::size_t>& test,
                     std::vector<double>& u, std::vector<double>& v) {
    const MatrixXd x_train = s.x(train, Eigen::all);
    const VectorXd y_train = s.y(train);
    const VectorXd f_train = s.f(train);
    const Problem p{x_train, y_train, f_train, s.x_unlabeled, s.f_unlabeled};
    VectorXd beta;
    if (link == Link::logit) {
        beta = solve_logistic(p, 1.0, 50, 1e-8).beta;
    } else {
        const ScoreState st = rectified_score(p, VectorXd::Zero(s.x.cols()), 1.0, Link::identity);
        beta = st.hessian.fullPivLu().solve(st.score);
    }
    VectorXd mu_u, w_u;
    mean_and_weight(s.x_unlabeled, beta, link, mu_u, w_u);
    const MatrixXd j = s.x_unlabeled.transpose() * w_u.asDiagonal() * s.x_unlabeled /
                       static_cast<double>(s.x_unlabeled.rows());
    Eigen::FullPivLU<MatrixXd> lu(j);
    const VectorXd g = lu.isInvertible() ? VectorXd(lu.transpose().solve(a)) : a;
    for (std::size_t i : test) {
        const auto row = s.x.row(static_cast<Eigen::Index>(i));
        const double eta = row.dot(beta);
        const double mu = link == Link::logit ? expit(eta) : eta;
        const double proj = row.dot(g);
        u.push_back(proj * (s.y(static_cast<Eigen::Index>(i)) - mu));
        v.push_back(proj * (s.f(static_cast<Eigen::Index>(i)) - mu));
    }
}

double ratio_of(const RegressionSample& s) {
    return static_cast<double>(s.x.rows()) / static_cast<double>(s.x_unlabeled.rows());
}

}  // namespace

double regression_crossfit_lambda(const RegressionSample& s, Link link, int K, const VectorXd& a,
                                  Rng& rng) {
    auto scorer = [&](const std::vector<std::size_t>& train, const std::vector<std::size_t>& test,
                      std::vector<double>& u, std::vector<double>& v) {
        contrast_scores(s, link, a, train, test, u, v);
    };
    return crossfit_lambda(static_cast<std::size_t>(s.x.rows()), K, ratio_of(s), rng, scorer);
}

double regression_plugin_lambda(const RegressionSample& s, Link link, const VectorXd& a) {
    std::vector<std::size_t> all(static_cast<std::size_t>(s.x.rows()));
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::vector<double> u, v;
    contrast_scores(s, link, a, all, all, u, v);
    return plugin_lambda(std::span<const double>(u), std::span<const double>(v), ratio_of(s)).value;
}

}  // namespace ppipower::sim
