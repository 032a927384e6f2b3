#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rapm/design.hpp"

namespace rapm {

enum class Family { gaussian, binomial };

const char* to_string(Family f);
Family family_from_string(const std::string& s);  ///< throws ConfigError

/// Elastic-net fit settings.
///
/// Objective: gaussian (1/2n) RSS, binomial (1/n) negative log-likelihood, plus
/// lambda * sum_j [ (1-alpha)/2 * v_j b_j^2 + alpha * u_j |b_j| ] over penalized
/// columns. With standardize, u_j = s_j and v_j = s_j^2 (s_j the 1/n standard
/// deviation of column j), which is the same as penalizing unit-variance columns;
/// otherwise u_j = v_j = 1. Coefficients are always on the original column scale.
struct FitSpec {
    Family family = Family::gaussian;
    double alpha = 1.0;
    double lambda = 0.0;
    std::vector<bool> penalty_mask;  ///< empty: use the design matrix's mask
    bool standardize = true;
    double tol = 1e-7;  ///< max coefficient change on the internal (standardized) scale
    int max_outer_iters = 100;
    int max_cd_sweeps = 1000;

    void validate() const;  ///< throws ConfigError
};

struct FitResult {
    Family family = Family::gaussian;
    double alpha = 1.0;
    double lambda = 0.0;
    double intercept = 0.0;
    std::vector<double> coefficients;
    std::size_t n_nonzero = 0;  ///< nonzero penalized coefficients
    double objective = 0.0;
    bool converged = false;
    int sweeps = 0;          ///< coordinate-descent sweeps, summed over IRLS steps
    int outer_iterations = 0;
    bool separation = false;  ///< |linear predictor| reached the cap of 30
    double dispersion = 0.0;  ///< gaussian: RSS / n
    std::vector<double> objective_trace;
    std::vector<std::string> warnings;
};

double soft_threshold(double z, double gamma);

/// Per-column penalty weights used by the solver.
struct PenaltyWeights {
    std::vector<bool> penalized;
    std::vector<double> l1;  ///< u_j
    std::vector<double> l2;  ///< v_j
};
PenaltyWeights penalty_weights(const DesignMatrix& x, const FitSpec& spec);

FitResult fit_gaussian(const DesignMatrix& x, std::span<const double> y, const FitSpec& spec);
FitResult fit_binomial(const DesignMatrix& x, std::span<const double> y01, const FitSpec& spec);
FitResult fit(const DesignMatrix& x, std::span<const double> y, const FitSpec& spec);

/// Smallest lambda at which every penalized coefficient is zero. Requires alpha > 0.
double lambda_max(const DesignMatrix& x, std::span<const double> y, const FitSpec& spec);

std::vector<double> predict_linear(const FitResult& fit, const DesignMatrix& x);
std::vector<double> predict_prob(const FitResult& fit, const DesignMatrix& x);

double logistic(double mu);

/// Penalized objective of `fit` under `spec` (spec.lambda and alpha taken from fit).
double penalized_objective(const DesignMatrix& x, std::span<const double> y,
                           const FitResult& fit, const FitSpec& spec);

/// Largest violation of the stationarity conditions (including the intercept).
double kkt_violation(const DesignMatrix& x, std::span<const double> y, const FitResult& fit,
                     const FitSpec& spec);

/// Warm-started solver over a sequence of lambda values on fixed data.
class PathSolver {
public:
    PathSolver(const DesignMatrix& x, std::span<const double> y, FitSpec spec);
    ~PathSolver();
    PathSolver(PathSolver&&) noexcept;
    PathSolver& operator=(PathSolver&&) noexcept;

    /// Fits at `lambda`, starting from the previous solution.
    FitResult solve(double lambda);

    struct Impl;

private:
    std::unique_ptr<Impl> impl_;
};

std::vector<FitResult> fit_path(const DesignMatrix& x, std::span<const double> y,
                                const FitSpec& spec, std::span<const double> lambdas);

} // namespace rapm

#include <json.hpp>

namespace rapm {

/// {family, alpha, lambda, intercept, coefficients: [{column, name, value}], n_nonzero,
///  converged, objective}. Exact zeros are omitted from the coefficient array.
nlohmann::json fit_to_json(const FitResult& fit, const DesignMatrix& x);

/// Reads a fit written by fit_to_json, matching coefficients to `x` by column name.
/// Names missing from `x` are returned in `unmatched` (their effect is dropped).
FitResult fit_from_json(const nlohmann::json& j, const DesignMatrix& x,
                        std::vector<std::string>* unmatched = nullptr);

} // namespace rapm
