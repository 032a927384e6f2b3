#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "rapm/errors.hpp"
#include "rapm/glm.hpp"

namespace rapm {

const char* to_string(Family f) { return f == Family::gaussian ? "gaussian" : "binomial"; }

Family family_from_string(const std::string& s)
{
    if (s == "gaussian" || s == "normal")
        return Family::gaussian;
    if (s == "binomial" || s == "logistic")
        return Family::binomial;
    throw ConfigError(fmt::format("unknown family '{}' (expected gaussian or binomial)", s));
}

void FitSpec::validate() const
{
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw ConfigError(fmt::format("alpha must lie in [0, 1], got {}", alpha));
    if (!(lambda >= 0.0))
        throw ConfigError(fmt::format("lambda must be nonnegative, got {}", lambda));
    if (!(tol > 0.0))
        throw ConfigError(fmt::format("tol must be positive, got {}", tol));
    if (max_outer_iters < 1 || max_cd_sweeps < 1)
        throw ConfigError("iteration limits must be positive");
}

double soft_threshold(double z, double gamma)
{
    if (z > gamma)
        return z - gamma;
    if (z < -gamma)
        return z + gamma;
    return 0.0;
}

double logistic(double mu)
{
    if (mu >= 0)
        return 1.0 / (1.0 + std::exp(-mu));
    const double e = std::exp(mu);
    return e / (1.0 + e);
}

PenaltyWeights penalty_weights(const DesignMatrix& x, const FitSpec& spec)
{
    const std::size_t m = x.cols();
    PenaltyWeights pw;
    if (spec.penalty_mask.empty()) {
        pw.penalized = x.penalty_mask();
    } else {
        if (spec.penalty_mask.size() != m)
            throw ConfigError(fmt::format("penalty mask has {} entries for {} columns",
                                          spec.penalty_mask.size(), m));
        pw.penalized = spec.penalty_mask;
    }
    pw.l1.assign(m, 1.0);
    pw.l2.assign(m, 1.0);
    if (spec.standardize && x.rows() > 0) {
        const double inv_n = 1.0 / static_cast<double>(x.rows());
        for (std::size_t j = 0; j < m; ++j) {
            double sx = 0.0, sxx = 0.0;
            for (double v : x.column_values(j)) {
                sx += v;
                sxx += v * v;
            }
            const double mean = sx * inv_n;
            const double var = std::max(sxx * inv_n - mean * mean, 0.0);
            pw.l1[j] = std::sqrt(var);
            pw.l2[j] = var;
        }
    }
    return pw;
}

std::vector<double> predict_linear(const FitResult& fit, const DesignMatrix& x)
{
    std::vector<double> mu = x.multiply(fit.coefficients);
    for (double& v : mu)
        v += fit.intercept;
    return mu;
}

std::vector<double> predict_prob(const FitResult& fit, const DesignMatrix& x)
{
    std::vector<double> p = predict_linear(fit, x);
    for (double& v : p)
        v = logistic(v);
    return p;
}

namespace {

std::vector<double> fitted_residual(const DesignMatrix& x, std::span<const double> y,
                                    const FitResult& fit)
{
    std::vector<double> mu = predict_linear(fit, x);
    for (std::size_t i = 0; i < mu.size(); ++i)
        mu[i] = y[i] - (fit.family == Family::binomial ? logistic(mu[i]) : mu[i]);
    return mu;
}

} // namespace

double penalized_objective(const DesignMatrix& x, std::span<const double> y, const FitResult& fit,
                           const FitSpec& spec)
{
    const PenaltyWeights pw = penalty_weights(x, spec);
    const std::vector<double> mu = predict_linear(fit, x);
    const double n = static_cast<double>(x.rows());
    double loss = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (fit.family == Family::gaussian) {
            loss += 0.5 * (y[i] - mu[i]) * (y[i] - mu[i]);
        } else {
            const double e = mu[i];
            loss += (e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e))) - y[i] * e;
        }
    }
    double pen = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) {
        const double b = fit.coefficients[j];
        if (pw.penalized[j])
            pen += (1.0 - fit.alpha) / 2.0 * pw.l2[j] * b * b + fit.alpha * pw.l1[j] * std::abs(b);
    }
    return loss / n + fit.lambda * pen;
}

double kkt_violation(const DesignMatrix& x, std::span<const double> y, const FitResult& fit,
                     const FitSpec& spec)
{
    const PenaltyWeights pw = penalty_weights(x, spec);
    const std::vector<double> r = fitted_residual(x, y, fit);
    const double inv_n = 1.0 / static_cast<double>(x.rows());

    double mean_r = 0.0;
    for (double v : r)
        mean_r += v;
    double worst = std::abs(mean_r * inv_n);

    const double lam = fit.lambda, a = fit.alpha;
    for (std::size_t j = 0; j < x.cols(); ++j) {
        auto idx = x.column_rows(j);
        auto val = x.column_values(j);
        double g = 0.0;
        for (std::size_t k = 0; k < idx.size(); ++k)
            g += val[k] * r[idx[k]];
        g *= inv_n;
        const double b = fit.coefficients[j];
        double v;
        if (!pw.penalized[j])
            v = std::abs(g);
        else if (b == 0.0)
            v = std::max(0.0, std::abs(g) - lam * a * pw.l1[j]);
        else
            v = std::abs(g - lam * (1.0 - a) * pw.l2[j] * b -
                         lam * a * pw.l1[j] * (b > 0 ? 1.0 : -1.0));
        worst = std::max(worst, v);
    }
    return worst;
}

} // namespace rapm
