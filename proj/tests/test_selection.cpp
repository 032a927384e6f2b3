#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rapm/errors.hpp"
#include "rapm/model_selection.hpp"

using namespace rapm;

namespace {

struct Data {
    DesignMatrix x;
    std::vector<double> y;
};

Data signal_data(std::uint64_t seed, int n = 300, int p = 30)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    const Eigen::MatrixXd xm = oracle::random_matrix(rng, n, p);
    std::vector<double> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        y[static_cast<std::size_t>(i)] = 2.0 * xm(i, 0) - 1.5 * xm(i, 1) + xm(i, 2) + z(rng);
    return {oracle::to_design(xm), std::move(y)};
}

} // namespace

TEST_CASE("lambda grid is geometric and strictly decreasing")
{
    const auto path = make_lambda_path(2.0, 100, 1e-4);
    REQUIRE(path.size() == 100);
    CHECK(path.front() == 2.0);
    CHECK(path.back() == doctest::Approx(2e-4).epsilon(1e-12));
    for (std::size_t k = 1; k < path.size(); ++k) {
        CHECK(path[k] < path[k - 1]);
        CHECK(path[k] / path[k - 1] == doctest::Approx(std::pow(1e-4, 1.0 / 99.0)));
    }
    CHECK(make_lambda_path(3.0, 1).size() == 1);
    CHECK_THROWS_AS(make_lambda_path(0.0), ConfigError);
    CHECK_THROWS_AS(make_lambda_path(1.0, 0), ConfigError);
    CHECK_THROWS_AS(make_lambda_path(1.0, 10, 1.5), ConfigError);
}

TEST_CASE("ridge paths start at the lambda_max of alpha 0.001")
{
    const auto d = signal_data(3);
    FitSpec ridge;
    ridge.alpha = 0.0;
    FitSpec tiny;
    tiny.alpha = 1e-3;
    CHECK(lambda_path(d.x, d.y, ridge, 10).front() == lambda_max(d.x, d.y, tiny));
}

TEST_CASE("fold assignment is balanced and reproducible")
{
    for (std::size_t n : {10u, 97u, 1000u}) {
        const auto a = kfold_split(n, 10, 42);
        const auto b = kfold_split(n, 10, 42);
        CHECK(a == b);
        std::vector<std::size_t> size(10, 0);
        for (int f : a) {
            REQUIRE(f >= 0);
            REQUIRE(f < 10);
            ++size[static_cast<std::size_t>(f)];
        }
        const auto [lo, hi] = std::minmax_element(size.begin(), size.end());
        CHECK(*hi - *lo <= 1);
    }
    CHECK(kfold_split(1000, 10, 1) != kfold_split(1000, 10, 2));
    CHECK_THROWS_AS(kfold_split(5, 10, 1), ConfigError);
    CHECK_THROWS_AS(kfold_split(50, 1, 1), ConfigError);
}

TEST_CASE("held-out metrics")
{
    const std::vector<double> y{1.0, 0.0, 1.0, 0.0};
    const std::vector<double> f{0.5, 0.5, 0.5, 0.5};
    CHECK(holdout_metric(Family::gaussian, CvMetric::rmse, y, f) == doctest::Approx(0.5));
    CHECK(holdout_metric(Family::gaussian, CvMetric::deviance, y, f) == doctest::Approx(0.25));
    CHECK(holdout_metric(Family::binomial, CvMetric::deviance, y, f) ==
          doctest::Approx(-2.0 * std::log(0.5)));
    const std::vector<double> sure{1.0, 0.0, 1.0, 0.0};
    CHECK(std::isfinite(holdout_metric(Family::binomial, CvMetric::deviance, y, sure)));
    CHECK(metric_from_string("deviance") == CvMetric::deviance);
    CHECK_THROWS_AS(metric_from_string("mae"), ConfigError);
}

TEST_CASE("cross-validation matches fold fits done by hand")
{
    const auto d = signal_data(5, 120, 8);
    FitSpec spec;
    spec.tol = 1e-10;
    const auto path = lambda_path(d.x, d.y, spec, 12, 1e-2);
    const auto folds = kfold_split(d.x.rows(), 4, 9);
    const auto cv = cross_validate(d.x, d.y, spec, path, folds, 4, 9, CvMetric::rmse);

    std::vector<std::vector<double>> score(4);
    for (int f = 0; f < 4; ++f) {
        std::vector<std::size_t> train, test;
        for (std::size_t i = 0; i < d.x.rows(); ++i)
            (folds[i] == f ? test : train).push_back(i);
        std::vector<double> ytr, yte;
        for (auto i : train)
            ytr.push_back(d.y[i]);
        for (auto i : test)
            yte.push_back(d.y[i]);
        const auto xtr = d.x.select_rows(train);
        const auto xte = d.x.select_rows(test);
        for (double lambda : path) {
            FitSpec s = spec;
            s.lambda = lambda;
            const auto pred = predict_linear(fit_gaussian(xtr, ytr, s), xte);
            double ss = 0.0;
            for (std::size_t i = 0; i < yte.size(); ++i)
                ss += (yte[i] - pred[i]) * (yte[i] - pred[i]);
            score[static_cast<std::size_t>(f)].push_back(std::sqrt(ss / static_cast<double>(yte.size())));
        }
    }
    for (std::size_t l = 0; l < path.size(); ++l) {
        double mean = 0.0;
        for (const auto& s : score)
            mean += s[l] / 4.0;
        double var = 0.0;
        for (const auto& s : score)
            var += (s[l] - mean) * (s[l] - mean) / 3.0;
        CHECK(cv.path[l].mean == doctest::Approx(mean).epsilon(1e-7));
        CHECK(cv.path[l].se == doctest::Approx(std::sqrt(var / 4.0)).epsilon(1e-5));
        CHECK(cv.path[l].folds_used == 4);
    }
}

TEST_CASE("strong signal puts lambda_min strictly inside the grid")
{
    const auto d = signal_data(7);
    FitSpec spec;
    const auto path = lambda_path(d.x, d.y, spec, 50, 1e-3);
    const auto cv = cross_validate(d.x, d.y, spec, path, 10, 11, CvMetric::rmse);
    CHECK(cv.index_min > 0);
    CHECK(cv.index_min < path.size() - 1);
    for (const auto& p : cv.path)
        CHECK(cv.path[cv.index_min].mean <= p.mean);
    CHECK(cv.lambda_min == path[cv.index_min]);
    CHECK(cv.index_1se <= cv.index_min);
    CHECK(cv.path[cv.index_1se].mean <= cv.path[cv.index_min].mean + cv.path[cv.index_min].se);
    CHECK(cv.path.front().mean > cv.path[cv.index_min].mean);

    const auto again = cross_validate(d.x, d.y, spec, path, 10, 11, CvMetric::rmse);
    CHECK(again.lambda_min == cv.lambda_min);
    CHECK(again.path[5].mean == cv.path[5].mean);
}

TEST_CASE("cross-validation rejects bad paths")
{
    const auto d = signal_data(13, 50, 5);
    const std::vector<double> rising{0.1, 0.2};
    CHECK_THROWS_AS(cross_validate(d.x, d.y, {}, rising, 5, 1, CvMetric::rmse), ConfigError);
    CHECK_THROWS_AS(cross_validate(d.x, d.y, {}, std::vector<double>{}, 5, 1, CvMetric::rmse),
                    ConfigError);
}

TEST_CASE("non-converged fold fits are excluded with a warning")
{
    const auto d = signal_data(17, 100, 10);
    FitSpec spec;
    spec.tol = 1e-15;
    spec.max_cd_sweeps = 2;
    const auto path = lambda_path(d.x, d.y, spec, 10, 1e-3);
    const auto cv = cross_validate(d.x, d.y, spec, path, 5, 3, CvMetric::rmse);
    CHECK_FALSE(cv.warnings.empty());
    CHECK(cv.path.back().folds_used < 5);
}

TEST_CASE("CV JSON carries the grid and the selection")
{
    const auto d = signal_data(19, 80, 5);
    const auto path = lambda_path(d.x, d.y, {}, 8, 1e-2);
    const auto cv = cross_validate(d.x, d.y, {}, path, 4, 2, CvMetric::deviance);
    const auto j = cv_to_json(cv);
    CHECK(j["metric"] == "deviance");
    CHECK(j["K"] == 4);
    CHECK(j["seed"] == 2);
    CHECK(j["path"].size() == 8);
    CHECK(j["lambda_min"].get<double>() == cv.lambda_min);
    const auto text = cv_to_text(cv);
    CHECK(text.find("lambda_min") != std::string::npos);
}
