#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <fmt/format.h>

#include "rapm/errors.hpp"
#include "rapm/ratings.hpp"

namespace rapm {

RapmColumns extract_rapm(const FitResult& fit, const DesignMatrix& x,
                         const PlayerRegistry& registry)
{
    if (x.player_count() != registry.size() || fit.coefficients.size() != x.cols())
        throw InputError("fit is not aligned with the player registry");
    RapmColumns out;
    for (const auto& p : registry.players()) {
        out.players.push_back(p.key);
        out.offense.push_back(fit.coefficients[x.offense_column(p.offense_index)]);
        out.defense.push_back(fit.coefficients[x.defense_column(p.defense_index)]);
    }
    return out;
}

LinearMap binomial_normal_map(std::span<const double> rapm_normal,
                              std::span<const double> rapm_binomial)
{
    if (rapm_normal.size() != rapm_binomial.size())
        throw InputError("rating vectors differ in length");
    const std::size_t n = rapm_normal.size();
    if (n < 3)
        throw InputError(fmt::format("linear map needs at least 3 players, got {}", n));
    const double mx = std::accumulate(rapm_normal.begin(), rapm_normal.end(), 0.0) / n;
    const double my = std::accumulate(rapm_binomial.begin(), rapm_binomial.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = rapm_normal[i] - mx, dy = rapm_binomial[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0.0)
        throw NumericalError("normal ratings have zero variance");
    LinearMap m;
    m.n = n;
    m.slope = sxy / sxx;
    m.intercept = my - m.slope * mx;
    const double rss = std::max(0.0, syy - m.slope * sxy);
    m.r_squared = syy > 0.0 ? 1.0 - rss / syy : 1.0;
    m.residual_sd = std::sqrt(rss / static_cast<double>(n - 2));
    return m;
}

std::vector<std::size_t> support_of(const FitResult& fit)
{
    std::vector<std::size_t> s;
    for (std::size_t j = 0; j < fit.coefficients.size(); ++j)
        if (fit.coefficients[j] != 0.0)
            s.push_back(j);
    return s;
}

double shrinkage_fraction(const FitResult& fit, const FitResult& reference, const DesignMatrix& x)
{
    if (fit.coefficients.size() != x.cols() || reference.coefficients.size() != x.cols())
        throw InputError("fits are not aligned with the design");
    double num = 0.0, den = 0.0;
    for (std::size_t j = x.extra_count(); j < x.cols(); ++j) {
        num += std::abs(fit.coefficients[j]);
        den += std::abs(reference.coefficients[j]);
    }
    if (den == 0.0)
        throw InputError("reference fit has no nonzero player coefficient");
    return 1.0 - num / den;
}

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor>;

SpMat support_matrix(const DesignMatrix& x, std::span<const std::size_t> support)
{
    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t k = 0; k < support.size(); ++k) {
        if (support[k] >= x.cols())
            throw InputError(fmt::format("support column {} out of range", support[k]));
        auto rows = x.column_rows(support[k]);
        auto vals = x.column_values(support[k]);
        for (std::size_t i = 0; i < rows.size(); ++i)
            t.emplace_back(static_cast<int>(rows[i]), static_cast<int>(k), vals[i]);
    }
    SpMat m(static_cast<Eigen::Index>(x.rows()), static_cast<Eigen::Index>(support.size()));
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

// True when the symmetric matrix is numerically singular.
bool rank_deficient(const Eigen::MatrixXd& a)
{
    if (a.rows() == 0)
        return false;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    const double top = ev.cwiseAbs().maxCoeff();
    return top <= 0.0 || ev.minCoeff() <= 1e-10 * top;
}

constexpr double kRidgeFallback = 1e-8;
constexpr double kEtaCap = 30.0;

double binomial_nll(const Eigen::VectorXd& eta, std::span<const double> y)
{
    double s = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double e = eta[i];
        // log(1 + exp(e)) - y e, computed stably
        s += (e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e))) - y[i] * e;
    }
    return s / static_cast<double>(eta.size());
}

} // namespace

FitResult after_lasso_refit(const DesignMatrix& x, std::span<const double> y, Family family,
                            std::span<const std::size_t> support)
{
    const std::size_t n = x.rows();
    if (y.size() != n)
        throw InputError("response length does not match the design");
    if (n == 0)
        throw InputError("empty design");
    const auto p = static_cast<Eigen::Index>(support.size());
    const SpMat xs = support_matrix(x, support);
    const double nd = static_cast<double>(n);
    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(n));

    FitResult r;
    r.family = family;
    r.alpha = 1.0;
    r.lambda = 0.0;
    r.coefficients.assign(x.cols(), 0.0);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);

    if (family == Family::gaussian) {
        const Eigen::VectorXd mean = (Eigen::RowVectorXd::Ones(static_cast<Eigen::Index>(n)) * xs)
                                         .transpose() / nd;
        const double ybar = yv.mean();
        Eigen::MatrixXd gram = Eigen::MatrixXd(xs.transpose() * xs) / nd - mean * mean.transpose();
        Eigen::VectorXd rhs = (xs.transpose() * yv) / nd - mean * ybar;
        if (rank_deficient(gram)) {
            r.warnings.push_back("support is rank deficient; refit uses a ridge of 1e-8");
            gram.diagonal().array() += kRidgeFallback;
        }
        if (p > 0)
            beta = gram.ldlt().solve(rhs);
        r.intercept = ybar - mean.dot(beta);
        const Eigen::VectorXd resid = yv - (xs * beta).array().matrix() -
                                      Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), r.intercept);
        r.dispersion = resid.squaredNorm() / nd;
        r.objective = 0.5 * r.dispersion;
        r.converged = true;
        r.outer_iterations = 1;
    } else {
        const double ybar = std::clamp(yv.mean(), 1e-6, 1.0 - 1e-6);
        double b0 = std::log(ybar / (1.0 - ybar));
        bool ridge = false;
        const auto eta_of = [&](const Eigen::VectorXd& b, double c) {
            Eigen::VectorXd e = xs * b;
            e.array() += c;
            return e;
        };
        const auto objective = [&](const Eigen::VectorXd& b, double c) {
            const double pen = ridge ? 0.5 * kRidgeFallback * b.squaredNorm() : 0.0;
            return binomial_nll(eta_of(b, c), y) + pen;
        };
        double obj = objective(beta, b0);
        for (int it = 0; it < 100; ++it) {
            r.outer_iterations = it + 1;
            const Eigen::VectorXd eta = eta_of(beta, b0);
            Eigen::VectorXd mu(eta.size()), w(eta.size());
            for (Eigen::Index i = 0; i < eta.size(); ++i) {
                const double e = std::clamp(eta[i], -kEtaCap, kEtaCap);
                mu[i] = logistic(e);
                w[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-5);
            }
            const Eigen::VectorXd g_res = (mu - yv) / nd;
            // augmented Hessian [X 1]' W [X 1] / n
            Eigen::MatrixXd h(p + 1, p + 1);
            h.topLeftCorner(p, p) = Eigen::MatrixXd(xs.transpose() * w.asDiagonal() * xs) / nd;
            const Eigen::VectorXd xw = (xs.transpose() * w) / nd;
            h.block(0, p, p, 1) = xw;
            h.block(p, 0, 1, p) = xw.transpose();
            h(p, p) = w.sum() / nd;
            Eigen::VectorXd g(p + 1);
            g.head(p) = xs.transpose() * g_res;
            g[p] = g_res.sum();
            if (it == 0 && rank_deficient(h)) {
                ridge = true;
                r.warnings.push_back("support is rank deficient; refit uses a ridge of 1e-8");
                obj = objective(beta, b0);
            }
            if (ridge) {
                h.topLeftCorner(p, p).diagonal().array() += kRidgeFallback;
                g.head(p) += kRidgeFallback * beta;
            }
            const Eigen::VectorXd step = h.ldlt().solve(g);
            double t = 1.0, next = obj;
            Eigen::VectorXd nb;
            double nc = b0;
            for (int half = 0; half < 30; ++half, t *= 0.5) {
                nb = beta - t * step.head(p);
                nc = b0 - t * step[p];
                next = objective(nb, nc);
                if (next <= obj + 1e-12 * std::abs(obj))
                    break;
            }
            const double change = t * step.cwiseAbs().maxCoeff();
            beta = nb;
            b0 = nc;
            const double prev = obj;
            obj = next;
            if (change < 1e-10 || std::abs(prev - obj) <= 1e-14 * std::max(1.0, std::abs(obj))) {
                r.converged = true;
                break;
            }
        }
        if (!r.converged)
            r.warnings.push_back("after-lasso Newton iterations did not converge");
        r.intercept = b0;
        r.objective = obj;
        const Eigen::VectorXd eta = eta_of(beta, b0);
        r.separation = eta.size() > 0 && eta.cwiseAbs().maxCoeff() >= kEtaCap;
        if (r.separation)
            r.warnings.push_back("linear predictor reached the cap; the data may be separable");
    }
    const auto mask = x.penalty_mask();
    for (Eigen::Index k = 0; k < p; ++k) {
        r.coefficients[support[static_cast<std::size_t>(k)]] = beta[k];
        if (beta[k] != 0.0 && mask[support[static_cast<std::size_t>(k)]])
            ++r.n_nonzero;
    }
    return r;
}

namespace {

double pearson(std::span<const double> a, std::span<const double> b)
{
    const std::size_t n = a.size();
    if (n < 3)
        throw InputError(fmt::format("correlation needs at least 3 pairs, got {}", n));
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
        sab += (a[i] - ma) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0)
        throw NumericalError("correlation of a constant vector");
    return sab / std::sqrt(saa * sbb);
}

std::vector<double> average_ranks(std::span<const double> v)
{
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return v[i] < v[j]; });
    std::vector<double> rank(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]])
            ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            rank[order[k]] = avg;
        i = j + 1;
    }
    return rank;
}

} // namespace

double rating_correlation(std::span<const double> dense, std::span<const double> sparse,
                          bool include_zeros)
{
    if (dense.size() != sparse.size())
        throw InputError("rating vectors differ in length");
    if (include_zeros)
        return pearson(dense, sparse);
    std::vector<double> a, b;
    for (std::size_t i = 0; i < dense.size(); ++i) {
        if (sparse[i] == 0.0)
            continue;
        a.push_back(dense[i]);
        b.push_back(sparse[i]);
    }
    return pearson(a, b);
}

double spearman(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw InputError("rating vectors differ in length");
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    return pearson(ra, rb);
}

} // namespace rapm
