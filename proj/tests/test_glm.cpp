#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "rapm/errors.hpp"
#include "rapm/glm.hpp"

using namespace rapm;

namespace {

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

double max_diff(const FitResult& f, const oracle::DenseFit& o)
{
    double d = std::abs(f.intercept - o.intercept);
    for (Eigen::Index j = 0; j < o.beta.size(); ++j)
        d = std::max(d, std::abs(f.coefficients[static_cast<std::size_t>(j)] - o.beta[j]));
    return d;
}

struct Problem {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
};

Problem gaussian_problem(std::uint64_t seed, int n = 40, int p = 6)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    Problem pr{oracle::random_matrix(rng, n, p), Eigen::VectorXd(n)};
    for (int i = 0; i < n; ++i)
        pr.y[i] = 0.5 + 1.5 * pr.x(i, 0) - 0.8 * pr.x(i, 1) + z(rng);
    return pr;
}

Problem binomial_problem(std::uint64_t seed, int n = 200, int p = 4)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Problem pr{oracle::random_matrix(rng, n, p), Eigen::VectorXd(n)};
    for (int i = 0; i < n; ++i) {
        const double eta = -0.3 + 0.8 * pr.x(i, 0) - 0.5 * pr.x(i, 2);
        pr.y[i] = u(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
    }
    return pr;
}

} // namespace

TEST_CASE("soft threshold")
{
    CHECK(soft_threshold(3.0, 1.0) == 2.0);
    CHECK(soft_threshold(-3.0, 1.0) == -2.0);
    CHECK(soft_threshold(0.5, 1.0) == 0.0);
    CHECK(soft_threshold(-1.0, 1.0) == 0.0);
}

TEST_CASE("FitSpec validation")
{
    FitSpec s;
    s.alpha = 1.5;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = {};
    s.lambda = -1.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = {};
    s.tol = 0.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    CHECK_THROWS_AS(family_from_string("poisson"), ConfigError);
    CHECK(family_from_string("binomial") == Family::binomial);
}

TEST_CASE("bad responses are input errors")
{
    const auto pr = gaussian_problem(1);
    const auto x = oracle::to_design(pr.x);
    auto y = to_vec(pr.y);
    y[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(fit_gaussian(x, y, {}), InputError);
    y[3] = 0.5;
    CHECK_THROWS_AS(fit_binomial(x, y, {}), InputError);
    std::vector<double> short_y(3, 1.0);
    CHECK_THROWS_AS(fit_gaussian(x, short_y, {}), InputError);
}

TEST_CASE("ridge matches the closed form")
{
    for (bool standardize : {true, false})
        for (double lambda : {0.01, 0.3, 2.0}) {
            const auto pr = gaussian_problem(7);
            const auto x = oracle::to_design(pr.x);
            FitSpec spec;
            spec.alpha = 0.0;
            spec.lambda = lambda;
            spec.standardize = standardize;
            spec.tol = 1e-12;
            const auto f = fit_gaussian(x, to_vec(pr.y), spec);
            const std::vector<bool> pen(pr.x.cols(), true);
            CHECK(f.converged);
            CHECK(max_diff(f, oracle::ridge(pr.x, pr.y, lambda, pen, standardize)) < 1e-8);
        }
}

TEST_CASE("lasso and elastic net match proximal gradient and satisfy KKT")
{
    for (double alpha : {1.0, 0.5})
        for (bool standardize : {true, false}) {
            const auto pr = gaussian_problem(11);
            const auto x = oracle::to_design(pr.x);
            FitSpec spec;
            spec.alpha = alpha;
            spec.standardize = standardize;
            spec.tol = 1e-12;
            spec.lambda = 0.3 * lambda_max(x, to_vec(pr.y), spec);
            const auto f = fit_gaussian(x, to_vec(pr.y), spec);
            const std::vector<bool> pen(pr.x.cols(), true);
            const auto ref =
                oracle::elastic_net_fista(pr.x, pr.y, alpha, spec.lambda, pen, standardize);
            CHECK(max_diff(f, ref) < 1e-6);
            CHECK(kkt_violation(x, to_vec(pr.y), f, spec) < 1e-6);
            CHECK(f.n_nonzero < static_cast<std::size_t>(pr.x.cols()));
        }
}

TEST_CASE("unpenalized columns are never shrunk")
{
    const auto pr = gaussian_problem(13);
    auto x = oracle::to_design(pr.x);
    x.set_penalized(0, false);
    FitSpec spec;
    spec.alpha = 0.0;
    spec.lambda = 0.5;
    spec.tol = 1e-12;
    const auto f = fit_gaussian(x, to_vec(pr.y), spec);
    std::vector<bool> pen(pr.x.cols(), true);
    pen[0] = false;
    CHECK(max_diff(f, oracle::ridge(pr.x, pr.y, 0.5, pen, true)) < 1e-8);
    // a huge lambda zeroes everything except the free column
    spec.alpha = 1.0;
    spec.lambda = 1e6;
    const auto g = fit_gaussian(x, to_vec(pr.y), spec);
    CHECK(g.n_nonzero == 0);
    CHECK(g.coefficients[0] != 0.0);
}

TEST_CASE("standardization equals penalizing unit-variance columns")
{
    const auto pr = gaussian_problem(17);
    const auto x = oracle::to_design(pr.x);
    const Eigen::VectorXd s = oracle::penalty_scale(pr.x, true);
    Eigen::MatrixXd scaled = pr.x;
    for (Eigen::Index j = 0; j < scaled.cols(); ++j)
        scaled.col(j) /= s[j];
    FitSpec a;
    a.lambda = 0.05;
    a.tol = 1e-12;
    FitSpec b = a;
    b.standardize = false;
    const auto fa = fit_gaussian(x, to_vec(pr.y), a);
    const auto fb = fit_gaussian(oracle::to_design(scaled), to_vec(pr.y), b);
    CHECK(std::abs(fa.intercept - fb.intercept) < 1e-8);
    for (std::size_t j = 0; j < fa.coefficients.size(); ++j)
        CHECK(std::abs(fa.coefficients[j] * s[static_cast<Eigen::Index>(j)] - fb.coefficients[j]) <
              1e-8);
}

TEST_CASE("ridge limit approaches least squares")
{
    const auto pr = gaussian_problem(19);
    FitSpec spec;
    spec.alpha = 0.0;
    spec.lambda = 1e-10;
    spec.tol = 1e-13;
    spec.max_cd_sweeps = 100000;
    const auto f = fit_gaussian(oracle::to_design(pr.x), to_vec(pr.y), spec);
    CHECK(max_diff(f, oracle::ols(pr.x, pr.y)) < 1e-6);
}

TEST_CASE("gaussian objective never increases across sweeps")
{
    const auto pr = gaussian_problem(23, 60, 10);
    FitSpec spec;
    spec.alpha = 0.7;
    spec.lambda = 0.02;
    spec.tol = 1e-12;
    const auto f = fit_gaussian(oracle::to_design(pr.x), to_vec(pr.y), spec);
    REQUIRE(f.objective_trace.size() > 1);
    for (std::size_t k = 1; k < f.objective_trace.size(); ++k)
        CHECK(f.objective_trace[k] <= f.objective_trace[k - 1] + 1e-12);
    CHECK(std::abs(f.objective -
                   penalized_objective(oracle::to_design(pr.x), to_vec(pr.y), f, spec)) < 1e-10);
}

TEST_CASE("lambda_max is the boundary of the null model")
{
    for (Family fam : {Family::gaussian, Family::binomial}) {
        const auto pr = fam == Family::gaussian ? gaussian_problem(29) : binomial_problem(29);
        const auto x = oracle::to_design(pr.x);
        FitSpec spec;
        spec.family = fam;
        spec.alpha = 0.8;
        spec.tol = 1e-10;
        const double top = lambda_max(x, to_vec(pr.y), spec);
        spec.lambda = top;
        CHECK(fit(x, to_vec(pr.y), spec).n_nonzero == 0);
        spec.lambda = 0.99 * top;
        CHECK(fit(x, to_vec(pr.y), spec).n_nonzero >= 1);
    }
    FitSpec ridge;
    ridge.alpha = 0.0;
    const auto pr = gaussian_problem(29);
    CHECK_THROWS_AS(lambda_max(oracle::to_design(pr.x), to_vec(pr.y), ridge), ConfigError);
}

TEST_CASE("unpenalized logistic matches Newton")
{
    const auto pr = binomial_problem(31);
    FitSpec spec;
    spec.tol = 1e-12;
    const auto f = fit_binomial(oracle::to_design(pr.x), to_vec(pr.y), spec);
    CHECK(f.converged);
    CHECK_FALSE(f.separation);
    CHECK(max_diff(f, oracle::logistic_newton(pr.x, pr.y)) < 1e-5);
}

TEST_CASE("penalized logistic satisfies KKT and decreases the objective")
{
    const auto pr = binomial_problem(37, 300, 8);
    const auto x = oracle::to_design(pr.x);
    FitSpec spec;
    spec.family = Family::binomial;
    spec.tol = 1e-10;
    spec.lambda = 0.2 * lambda_max(x, to_vec(pr.y), spec);
    const auto f = fit(x, to_vec(pr.y), spec);
    CHECK(f.converged);
    CHECK(kkt_violation(x, to_vec(pr.y), f, spec) < 1e-6);
    for (std::size_t k = 1; k < f.objective_trace.size(); ++k)
        CHECK(f.objective_trace[k] <= f.objective_trace[k - 1] + 1e-12);
}

TEST_CASE("separable data is flagged")
{
    Eigen::MatrixXd xm(20, 1);
    Eigen::VectorXd y(20);
    for (int i = 0; i < 20; ++i) {
        xm(i, 0) = i - 9.5;
        y[i] = i >= 10 ? 1.0 : 0.0;
    }
    const auto f = fit_binomial(oracle::to_design(xm), to_vec(y), {});
    CHECK(f.separation);
    CHECK_FALSE(f.warnings.empty());
}

TEST_CASE("zero and constant columns stay at zero")
{
    auto pr = gaussian_problem(41);
    pr.x.col(2).setZero();
    pr.x.col(4).setConstant(3.0);
    FitSpec spec;
    spec.alpha = 0.0;
    spec.lambda = 0.1;
    const auto f = fit_gaussian(oracle::to_design(pr.x), to_vec(pr.y), spec);
    CHECK(f.converged);
    CHECK(f.coefficients[2] == 0.0);
    CHECK(f.coefficients[4] == 0.0);
}

TEST_CASE("exhausted sweep budget reports non-convergence")
{
    const auto pr = gaussian_problem(43, 60, 10);
    FitSpec spec;
    spec.lambda = 1e-4;
    spec.tol = 1e-14;
    spec.max_cd_sweeps = 1;
    const auto f = fit_gaussian(oracle::to_design(pr.x), to_vec(pr.y), spec);
    CHECK_FALSE(f.converged);
    CHECK_FALSE(f.warnings.empty());
}

TEST_CASE("warm-started path equals cold fits")
{
    const auto pr = gaussian_problem(47, 50, 8);
    const auto x = oracle::to_design(pr.x);
    FitSpec spec;
    spec.tol = 1e-12;
    const double top = lambda_max(x, to_vec(pr.y), spec);
    const std::vector<double> lambdas{top, 0.5 * top, 0.1 * top, 0.01 * top};
    const auto path = fit_path(x, to_vec(pr.y), spec, lambdas);
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        spec.lambda = lambdas[k];
        const auto cold = fit_gaussian(x, to_vec(pr.y), spec);
        CHECK(std::abs(cold.intercept - path[k].intercept) < 1e-8);
        for (std::size_t j = 0; j < cold.coefficients.size(); ++j)
            CHECK(std::abs(cold.coefficients[j] - path[k].coefficients[j]) < 1e-8);
    }
}

TEST_CASE("fit JSON round trip omits zeros")
{
    const auto pr = gaussian_problem(53);
    const auto x = oracle::to_design(pr.x);
    FitSpec spec;
    spec.lambda = 0.5 * lambda_max(x, to_vec(pr.y), spec);
    const auto f = fit_gaussian(x, to_vec(pr.y), spec);
    const auto j = fit_to_json(f, x);
    CHECK(j["coefficients"].size() == f.n_nonzero);
    const auto back = fit_from_json(j, x);
    CHECK(back.intercept == f.intercept);
    CHECK(back.coefficients == f.coefficients);
    CHECK(back.lambda == f.lambda);
}
