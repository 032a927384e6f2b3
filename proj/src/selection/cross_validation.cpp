#include "rapm/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "rapm/errors.hpp"
#include "rapm/parallel.hpp"

namespace rapm {

std::vector<double> make_lambda_path(double lambda_max, std::size_t n_lambda, double ratio)
{
    if (!(lambda_max > 0.0) || !std::isfinite(lambda_max))
        throw ConfigError(fmt::format("lambda_max must be positive and finite, got {}", lambda_max));
    if (n_lambda == 0)
        throw ConfigError("lambda path needs at least one value");
    if (!(ratio > 0.0 && ratio < 1.0))
        throw ConfigError(fmt::format("lambda ratio must lie in (0, 1), got {}", ratio));
    std::vector<double> path(n_lambda);
    path[0] = lambda_max;
    const double step = n_lambda > 1 ? std::log(ratio) / static_cast<double>(n_lambda - 1) : 0.0;
    for (std::size_t k = 1; k < n_lambda; ++k)
        path[k] = lambda_max * std::exp(step * static_cast<double>(k));
    return path;
}

std::vector<double> lambda_path(const DesignMatrix& x, std::span<const double> y,
                                const FitSpec& spec, std::size_t n_lambda, double ratio)
{
    FitSpec s = spec;
    s.alpha = std::max(spec.alpha, 1e-3);
    double top = lambda_max(x, y, s);
    if (!(top > 0.0)) {
        // constant response: every lambda gives the null model
        top = 1e-8;
    }
    return make_lambda_path(top, n_lambda, ratio);
}

std::vector<int> kfold_split(std::size_t n, int folds, std::uint64_t seed)
{
    if (folds < 2)
        throw ConfigError(fmt::format("need at least 2 folds, got {}", folds));
    if (n < static_cast<std::size_t>(folds))
        throw ConfigError(fmt::format("cannot split {} rows into {} folds", n, folds));
    std::vector<int> fold(n);
    for (std::size_t i = 0; i < n; ++i)
        fold[i] = static_cast<int>(i % static_cast<std::size_t>(folds));
    std::mt19937_64 rng(seed);
    std::shuffle(fold.begin(), fold.end(), rng);
    return fold;
}

const char* to_string(CvMetric m) { return m == CvMetric::rmse ? "rmse" : "deviance"; }

CvMetric metric_from_string(const std::string& s)
{
    if (s == "rmse")
        return CvMetric::rmse;
    if (s == "deviance")
        return CvMetric::deviance;
    throw ConfigError(fmt::format("unknown CV metric '{}' (expected rmse or deviance)", s));
}

double holdout_metric(Family family, CvMetric metric, std::span<const double> y,
                      std::span<const double> fitted)
{
    const double n = static_cast<double>(y.size());
    double s = 0.0;
    if (metric == CvMetric::rmse || family == Family::gaussian) {
        for (std::size_t i = 0; i < y.size(); ++i)
            s += (y[i] - fitted[i]) * (y[i] - fitted[i]);
        return metric == CvMetric::rmse ? std::sqrt(s / n) : s / n;
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double p = std::clamp(fitted[i], 1e-15, 1.0 - 1e-15);
        s += y[i] > 0.5 ? std::log(p) : std::log1p(-p);
    }
    return -2.0 * s / n;
}

CvResult cross_validate(const DesignMatrix& x, std::span<const double> y, const FitSpec& spec,
                        std::span<const double> path, std::span<const int> fold_of_row, int folds,
                        std::uint64_t seed, CvMetric metric)
{
    if (path.empty())
        throw ConfigError("empty lambda path");
    for (std::size_t k = 1; k < path.size(); ++k)
        if (!(path[k] < path[k - 1]))
            throw ConfigError("lambda path must be strictly decreasing");
    if (fold_of_row.size() != x.rows() || y.size() != x.rows())
        throw InputError("fold assignment, response and design rows disagree");

    const std::size_t n_lambda = path.size();
    constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
    // metric[fold][lambda]
    std::vector<std::vector<double>> score(static_cast<std::size_t>(folds),
                                           std::vector<double>(n_lambda, kMissing));
    std::vector<std::vector<std::string>> notes(static_cast<std::size_t>(folds));

    parallel_for(static_cast<std::size_t>(folds), [&](std::size_t f) {
        std::vector<std::size_t> train, test;
        for (std::size_t i = 0; i < x.rows(); ++i)
            (fold_of_row[i] == static_cast<int>(f) ? test : train).push_back(i);
        if (test.empty() || train.empty()) {
            notes[f].push_back(fmt::format("fold {} has no {} rows; skipped", f,
                                           test.empty() ? "held-out" : "training"));
            return;
        }
        const DesignMatrix x_train = x.select_rows(train);
        const DesignMatrix x_test = x.select_rows(test);
        std::vector<double> y_train(train.size()), y_test(test.size());
        for (std::size_t k = 0; k < train.size(); ++k)
            y_train[k] = y[train[k]];
        for (std::size_t k = 0; k < test.size(); ++k)
            y_test[k] = y[test[k]];

        PathSolver solver(x_train, y_train, spec);
        for (std::size_t l = 0; l < n_lambda; ++l) {
            const FitResult fit = solver.solve(path[l]);
            if (!fit.converged) {
                // warm starts from here on would inherit the failure
                notes[f].push_back(fmt::format(
                    "fold {}: fit did not converge at lambda {}; it and smaller lambdas excluded",
                    f, path[l]));
                break;
            }
            const auto fitted = spec.family == Family::binomial ? predict_prob(fit, x_test)
                                                                : predict_linear(fit, x_test);
            score[f][l] = holdout_metric(spec.family, metric, y_test, fitted);
            if (fit.separation) {
                if (l + 1 < n_lambda)
                    notes[f].push_back(fmt::format(
                        "fold {}: separation at lambda {}; smaller lambdas excluded", f, path[l]));
                break;
            }
        }
    });

    CvResult cv;
    cv.metric = metric;
    cv.seed = seed;
    cv.folds = folds;
    for (const auto& n : notes)
        cv.warnings.insert(cv.warnings.end(), n.begin(), n.end());
    cv.path.resize(n_lambda);
    for (std::size_t l = 0; l < n_lambda; ++l) {
        auto& pt = cv.path[l];
        pt.lambda = path[l];
        double sum = 0.0;
        for (const auto& s : score)
            if (!std::isnan(s[l])) {
                sum += s[l];
                ++pt.folds_used;
            }
        if (pt.folds_used == 0) {
            pt.mean = std::numeric_limits<double>::infinity();
            pt.se = 0.0;
            continue;
        }
        pt.mean = sum / static_cast<double>(pt.folds_used);
        double ss = 0.0;
        for (const auto& s : score)
            if (!std::isnan(s[l]))
                ss += (s[l] - pt.mean) * (s[l] - pt.mean);
        pt.se = pt.folds_used > 1
                    ? std::sqrt(ss / static_cast<double>(pt.folds_used - 1) /
                                static_cast<double>(pt.folds_used))
                    : 0.0;
    }

    std::size_t best = 0;
    for (std::size_t l = 1; l < n_lambda; ++l)
        if (cv.path[l].mean < cv.path[best].mean)
            best = l;
    if (!std::isfinite(cv.path[best].mean))
        throw NumericalError("cross-validation produced no usable fold fits");
    cv.index_min = best;
    cv.lambda_min = path[best];
    const double bound = cv.path[best].mean + cv.path[best].se;
    cv.index_1se = best;
    for (std::size_t l = 0; l <= best; ++l)
        if (cv.path[l].mean <= bound) {
            cv.index_1se = l;
            break;
        }
    cv.lambda_1se = path[cv.index_1se];
    return cv;
}

CvResult cross_validate(const DesignMatrix& x, std::span<const double> y, const FitSpec& spec,
                        std::span<const double> path, int folds, std::uint64_t seed,
                        CvMetric metric)
{
    const auto fold_of_row = kfold_split(x.rows(), folds, seed);
    return cross_validate(x, y, spec, path, fold_of_row, folds, seed, metric);
}

nlohmann::json cv_to_json(const CvResult& cv)
{
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : cv.path)
        pts.push_back({{"lambda", p.lambda}, {"mean", p.mean}, {"se", p.se}});
    return {{"metric", to_string(cv.metric)}, {"seed", cv.seed},         {"K", cv.folds},
            {"path", std::move(pts)},         {"lambda_min", cv.lambda_min},
            {"lambda_1se", cv.lambda_1se}};
}

std::string cv_to_text(const CvResult& cv)
{
    std::string out = fmt::format("{:>14}  {:>12}  {:>12}\n", "lambda", to_string(cv.metric), "se");
    for (std::size_t l = 0; l < cv.path.size(); ++l) {
        const auto& p = cv.path[l];
        std::string mark;
        if (l == cv.index_min)
            mark += "  <- lambda_min";
        if (l == cv.index_1se)
            mark += "  <- lambda_1se";
        out += fmt::format("{:>14.6g}  {:>12.6f}  {:>12.6f}{}\n", p.lambda, p.mean, p.se, mark);
    }
    return out;
}

} // namespace rapm
