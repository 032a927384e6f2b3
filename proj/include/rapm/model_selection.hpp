#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rapm/design.hpp"
#include "rapm/glm.hpp"

namespace rapm {

/// Geometric grid from lambda_max down to ratio * lambda_max, strictly decreasing.
std::vector<double> make_lambda_path(double lambda_max, std::size_t n_lambda = 100,
                                     double ratio = 1e-4);

/// Path for `spec`; ridge (alpha = 0) uses the lambda_max of alpha = 0.001.
std::vector<double> lambda_path(const DesignMatrix& x, std::span<const double> y,
                                const FitSpec& spec, std::size_t n_lambda = 100,
                                double ratio = 1e-4);

/// Fold index in [0, folds) per row; sizes differ by at most one.
std::vector<int> kfold_split(std::size_t n, int folds, std::uint64_t seed);

enum class CvMetric { rmse, deviance };
const char* to_string(CvMetric m);
CvMetric metric_from_string(const std::string& s);

struct CvPoint {
    double lambda = 0.0;
    double mean = 0.0;
    double se = 0.0;
    std::size_t folds_used = 0;
};

struct CvResult {
    CvMetric metric = CvMetric::rmse;
    std::uint64_t seed = 0;
    int folds = 10;
    std::vector<CvPoint> path;
    std::size_t index_min = 0;
    std::size_t index_1se = 0;
    double lambda_min = 0.0;
    double lambda_1se = 0.0;
    std::vector<std::string> warnings;
};

/// Held-out metric of predictions `fitted` (mean for gaussian, probability for binomial).
double holdout_metric(Family family, CvMetric metric, std::span<const double> y,
                      std::span<const double> fitted);

/// K-fold cross-validation over `path` using a precomputed fold assignment
/// (`fold_of_row[i]` for row i). Each fold runs the path with warm starts and stops
/// after a fit that fails to converge (that lambda is excluded) or reaches separation
/// (that lambda is kept); the remaining lambdas of the fold are excluded.
CvResult cross_validate(const DesignMatrix& x, std::span<const double> y, const FitSpec& spec,
                        std::span<const double> path, std::span<const int> fold_of_row,
                        int folds, std::uint64_t seed, CvMetric metric);

CvResult cross_validate(const DesignMatrix& x, std::span<const double> y, const FitSpec& spec,
                        std::span<const double> path, int folds, std::uint64_t seed,
                        CvMetric metric);

/// {metric, seed, K, path: [{lambda, mean, se}], lambda_min, lambda_1se}
nlohmann::json cv_to_json(const CvResult& cv);

/// Aligned text columns: lambda, mean, se, with markers at lambda_min / lambda_1se.
std::string cv_to_text(const CvResult& cv);

} // namespace rapm
