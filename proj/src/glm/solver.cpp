#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "rapm/errors.hpp"
#include "rapm/glm.hpp"

namespace rapm {

namespace {

constexpr double kEtaCap = 30.0;
constexpr double kWeightFloor = 1e-5;

double binomial_loss(std::span<const double> y, std::span<const double> eta)
{
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double e = eta[i];
        const double softplus = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
        s += softplus - y[i] * e;
    }
    return s / static_cast<double>(y.size());
}

} // namespace

struct PathSolver::Impl {
    const DesignMatrix& x;
    std::vector<double> y;
    FitSpec spec;
    PenaltyWeights pw;
    std::size_t n;
    std::size_t m;
    double inv_n;

    std::vector<double> beta;
    double b0 = 0.0;
    bool started = false;

    // weighted least-squares state
    bool unit_weights = true;
    std::vector<double> w;
    std::vector<double> q;   // working response minus X*beta (intercept excluded)
    std::vector<double> xw;  // (1/n) sum_i w_i x_ij
    std::vector<double> h;   // centered curvature of column j
    std::vector<char> usable;
    std::vector<double> scale;  // weighted standard deviation used for convergence checks
    double wsum = 1.0;       // (1/n) sum_i w_i

    Impl(const DesignMatrix& x_, std::span<const double> y_, FitSpec s)
        : x(x_), y(y_.begin(), y_.end()), spec(std::move(s)), n(x_.rows()), m(x_.cols())
    {
        spec.validate();
        if (y.size() != n)
            throw InputError(fmt::format("response length {} does not match {} rows", y.size(), n));
        if (n == 0)
            throw InputError("cannot fit a model on zero rows");
        for (double v : y)
            if (!std::isfinite(v))
                throw InputError("response contains non-finite values");
        if (spec.family == Family::binomial)
            for (double v : y)
                if (v != 0.0 && v != 1.0)
                    throw InputError("binomial response must be 0/1");
        pw = penalty_weights(x, spec);
        inv_n = 1.0 / static_cast<double>(n);
        beta.assign(m, 0.0);
        q.assign(n, 0.0);
        xw.assign(m, 0.0);
        h.assign(m, 0.0);
        usable.assign(m, 0);
        scale.assign(m, 1.0);
    }

    void prepare_columns()
    {
        if (unit_weights) {
            wsum = 1.0;
        } else {
            double s = 0.0;
            for (double v : w)
                s += v;
            wsum = s * inv_n;
        }
        for (std::size_t j = 0; j < m; ++j) {
            auto idx = x.column_rows(j);
            auto val = x.column_values(j);
            double sx = 0.0, sxx = 0.0;
            if (unit_weights) {
                for (std::size_t k = 0; k < idx.size(); ++k) {
                    sx += val[k];
                    sxx += val[k] * val[k];
                }
            } else {
                for (std::size_t k = 0; k < idx.size(); ++k) {
                    const double wv = w[idx[k]] * val[k];
                    sx += wv;
                    sxx += wv * val[k];
                }
            }
            xw[j] = sx * inv_n;
            const double xxw = sxx * inv_n;
            h[j] = xxw - xw[j] * xw[j] / wsum;
            // constant or empty columns carry no information beyond the intercept
            usable[j] = h[j] > 1e-10 * xxw && xxw > 0.0;
            if (spec.standardize)
                scale[j] = usable[j] ? std::sqrt(h[j] / wsum) : 0.0;
        }
    }

    void reset_residual(std::span<const double> z)
    {
        q.assign(z.begin(), z.end());
        for (std::size_t j = 0; j < m; ++j) {
            if (beta[j] == 0.0)
                continue;
            auto idx = x.column_rows(j);
            auto val = x.column_values(j);
            for (std::size_t k = 0; k < idx.size(); ++k)
                q[idx[k]] -= val[k] * beta[j];
        }
    }

    void center_intercept()
    {
        double s = 0.0;
        if (unit_weights)
            for (double v : q)
                s += v;
        else
            for (std::size_t i = 0; i < n; ++i)
                s += w[i] * q[i];
        b0 = s * inv_n / wsum;
    }

    double penalty(double lambda) const
    {
        double p = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            if (pw.penalized[j] && beta[j] != 0.0)
                p += (1.0 - spec.alpha) / 2.0 * pw.l2[j] * beta[j] * beta[j] +
                     spec.alpha * pw.l1[j] * std::abs(beta[j]);
        return lambda * p;
    }

    double wls_objective(double lambda) const
    {
        double s = 0.0;
        if (unit_weights)
            for (double v : q)
                s += (v - b0) * (v - b0);
        else
            for (std::size_t i = 0; i < n; ++i)
                s += w[i] * (q[i] - b0) * (q[i] - b0);
        return 0.5 * s * inv_n + penalty(lambda);
    }

    /// Exact minimization over (beta_j, intercept). Returns the change in beta_j on the
    /// internal scale: times the column's weighted standard deviation when standardizing.
    double update(std::size_t j, double lambda, bool freeze_penalized)
    {
        if (!usable[j])
            return 0.0;
        auto idx = x.column_rows(j);
        auto val = x.column_values(j);
        double g = 0.0;
        if (unit_weights)
            for (std::size_t k = 0; k < idx.size(); ++k)
                g += val[k] * q[idx[k]];
        else
            for (std::size_t k = 0; k < idx.size(); ++k)
                g += w[idx[k]] * val[k] * q[idx[k]];
        g = g * inv_n - b0 * xw[j];

        const double old = beta[j];
        const double num = g + h[j] * old;
        double next;
        if (!pw.penalized[j])
            next = num / h[j];
        else if (freeze_penalized)
            next = 0.0;
        else
            next = soft_threshold(num, lambda * spec.alpha * pw.l1[j]) /
                   (h[j] + lambda * (1.0 - spec.alpha) * pw.l2[j]);
        const double delta = next - old;
        if (delta == 0.0)
            return 0.0;
        for (std::size_t k = 0; k < idx.size(); ++k)
            q[idx[k]] -= delta * val[k];
        b0 -= delta * xw[j] / wsum;
        beta[j] = next;
        return std::abs(delta) * scale[j];
    }

    /// Exact minimization of the weighted least-squares objective along
    /// beta[cols] += t * dir over all real t, with the intercept moving so that the
    /// fitted values stay centered. Every coefficient in `cols` must be nonzero.
    void line_search(const std::vector<std::size_t>& cols, std::vector<double>& dir,
                     double lambda)
    {
        std::vector<double> v(n, 0.0);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            auto idx = x.column_rows(cols[k]);
            auto val = x.column_values(cols[k]);
            for (std::size_t r = 0; r < idx.size(); ++r)
                v[idx[r]] += dir[k] * val[r];
        }
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            s += (unit_weights ? 1.0 : w[i]) * v[i];
        double db0 = -s * inv_n / wsum;
        for (double& e : v)
            e += db0;
        // f(t) = (1/2n) sum w (r - t v)^2 + penalty(beta + t dir), r = q - b0
        double a = 0.0, curv = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double wi = unit_weights ? 1.0 : w[i];
            a += wi * (q[i] - b0) * v[i];
            curv += wi * v[i] * v[i];
        }
        a *= inv_n;
        curv *= inv_n;
        double slope0 = -a;
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const std::size_t j = cols[k];
            if (pw.penalized[j])
                slope0 += lambda * dir[k] *
                          ((1.0 - spec.alpha) * pw.l2[j] * beta[j] +
                           spec.alpha * pw.l1[j] * (beta[j] > 0 ? 1.0 : -1.0));
        }
        if (slope0 > 0.0) {
            // search toward negative t instead
            for (double& d : dir)
                d = -d;
            for (double& e : v)
                e = -e;
            db0 = -db0;
            a = -a;
        }
        double lin = -a;
        std::vector<std::pair<double, std::size_t>> breaks;
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const std::size_t j = cols[k];
            const double d = dir[k];
            if (!pw.penalized[j] || d == 0.0)
                continue;
            const double l1 = lambda * spec.alpha * pw.l1[j];
            const double l2 = lambda * (1.0 - spec.alpha) * pw.l2[j];
            lin += l2 * beta[j] * d;
            curv += l2 * d * d;
            lin += l1 * (beta[j] > 0 ? 1.0 : -1.0) * d;
            if (l1 > 0.0 && beta[j] * d < 0.0)
                breaks.push_back({-beta[j] / d, k});
        }
        // the derivative lin + t * curv is piecewise linear, jumping up at each zero crossing
        if (!(curv > 0.0) || lin >= 0.0)
            return;
        std::sort(breaks.begin(), breaks.end());
        double t = 0.0;
        std::vector<std::size_t> zeroed;
        for (std::size_t b = 0;; ++b) {
            const double root = -lin / curv;
            if (b == breaks.size() || root <= breaks[b].first) {
                t = root;
                break;
            }
            const double tb = breaks[b].first;
            const std::size_t k = breaks[b].second;
            const double jump = 2.0 * lambda * spec.alpha * pw.l1[cols[k]] * std::abs(dir[k]);
            if (lin + curv * tb + jump >= 0.0) {
                t = tb;
                zeroed.push_back(k);
                while (b + 1 < breaks.size() && breaks[b + 1].first == tb)
                    zeroed.push_back(breaks[++b].second);
                break;
            }
            lin += jump;
        }
        if (!(t > 0.0))
            return;
        for (std::size_t k = 0; k < cols.size(); ++k)
            beta[cols[k]] += t * dir[k];
        b0 += t * db0;
        for (std::size_t i = 0; i < n; ++i)
            q[i] -= t * (v[i] - db0);
        for (std::size_t k : zeroed) {
            // land exactly on zero
            const std::size_t j = cols[k];
            const double rest = beta[j];
            beta[j] = 0.0;
            auto idx = x.column_rows(j);
            auto val = x.column_values(j);
            for (std::size_t r = 0; r < idx.size(); ++r)
                q[idx[r]] += rest * val[r];
        }
    }

    /// Line searches along uniform shifts of each player block's nonzero coefficients.
    /// With full lineups such a shift is confounded with the intercept, a direction
    /// single-coordinate moves only creep along.
    void shift_blocks(double lambda)
    {
        const std::size_t players = x.player_count();
        std::vector<std::size_t> cols;
        std::vector<double> dir;
        for (std::size_t block = 0; block < 2 && players > 0; ++block) {
            cols.clear();
            const std::size_t first = x.extra_count() + block * players;
            for (std::size_t j = first; j < first + players && j < m; ++j)
                if (beta[j] != 0.0 && usable[j])
                    cols.push_back(j);
            if (cols.size() < 2)
                continue;
            dir.assign(cols.size(), 1.0);
            line_search(cols, dir, lambda);
        }
    }

    /// Coordinate descent on the current weighted problem: full sweeps alternate
    /// with sweeps over the nonzero set until a full sweep moves nothing.
    bool wls(double lambda, bool freeze_penalized, int& sweeps, std::vector<double>* trace,
             double tol)
    {
        std::vector<std::size_t> active;
        const int budget = sweeps + spec.max_cd_sweeps;
        while (sweeps < budget) {
            center_intercept();
            double change = 0.0;
            for (std::size_t j = 0; j < m; ++j)
                change = std::max(change, update(j, lambda, freeze_penalized));
            ++sweeps;
            if (!freeze_penalized)
                shift_blocks(lambda);
            if (trace)
                trace->push_back(wls_objective(lambda));
            if (change < tol)
                return true;

            active.clear();
            for (std::size_t j = 0; j < m; ++j)
                if (beta[j] != 0.0 && usable[j])
                    active.push_back(j);
            while (sweeps < budget) {
                double c = 0.0;
                for (std::size_t j : active)
                    c = std::max(c, update(j, lambda, freeze_penalized));
                ++sweeps;
                if (trace)
                    trace->push_back(wls_objective(lambda));
                if (c < tol)
                    break;
            }
        }
        return false;
    }

    FitResult make_result(double lambda) const
    {
        FitResult r;
        r.family = spec.family;
        r.alpha = spec.alpha;
        r.lambda = lambda;
        r.intercept = b0;
        r.coefficients = beta;
        for (std::size_t j = 0; j < m; ++j)
            if (pw.penalized[j] && beta[j] != 0.0)
                ++r.n_nonzero;
        return r;
    }

    FitResult solve_gaussian(double lambda, bool freeze_penalized)
    {
        if (!started) {
            unit_weights = true;
            prepare_columns();
            started = true;
        }
        reset_residual(y);
        int sweeps = 0;
        std::vector<double> trace;
        const bool ok = wls(lambda, freeze_penalized, sweeps, &trace, spec.tol);
        center_intercept();
        FitResult r = make_result(lambda);
        r.converged = ok;
        r.sweeps = sweeps;
        r.outer_iterations = 1;
        r.objective = wls_objective(lambda);
        r.objective_trace = std::move(trace);
        double rss = 0.0;
        for (double v : q)
            rss += (v - b0) * (v - b0);
        r.dispersion = rss * inv_n;
        if (!ok)
            r.warnings.push_back(fmt::format(
                "coordinate descent did not converge in {} sweeps at lambda={}", sweeps, lambda));
        return r;
    }

    std::vector<double> linear_predictor() const
    {
        std::vector<double> eta = x.multiply(beta);
        for (double& e : eta)
            e += b0;
        return eta;
    }

    double binomial_objective(std::span<const double> eta, double lambda) const
    {
        return binomial_loss(y, eta) + penalty(lambda);
    }

    FitResult solve_binomial(double lambda, bool freeze_penalized)
    {
        FitResult r;
        bool separation = false;
        if (!started) {
            double ybar = 0.0;
            for (double v : y)
                ybar += v;
            ybar *= inv_n;
            const double lo = logistic(-kEtaCap), hi = logistic(kEtaCap);
            if (ybar <= lo || ybar >= hi)
                separation = true;
            ybar = std::clamp(ybar, lo, hi);
            b0 = std::log(ybar / (1.0 - ybar));
            unit_weights = false;
            w.assign(n, 0.0);
            started = true;
        }

        std::vector<double> eta = linear_predictor();
        double obj = binomial_objective(eta, lambda);
        std::vector<double> trace{obj};
        std::vector<double> z(n), old_beta, old_eta(n);
        int sweeps = 0;
        bool converged = false, inner_ok = true;
        int outer = 0;
        // early quadratic approximations are solved loosely; the last one to spec.tol
        double inner_tol = std::max(spec.tol, 1e-3);
        for (; outer < spec.max_outer_iters; ++outer) {
            for (std::size_t i = 0; i < n; ++i) {
                const double e = std::clamp(eta[i], -kEtaCap, kEtaCap);
                const double p = logistic(e);
                w[i] = std::max(p * (1.0 - p), kWeightFloor);
                z[i] = e + (y[i] - p) / w[i];
            }
            prepare_columns();
            old_beta = beta;
            const double old_b0 = b0;
            // q = z - X beta, with X beta = eta - b0
            for (std::size_t i = 0; i < n; ++i)
                q[i] = z[i] - (eta[i] - old_b0);
            inner_ok = wls(lambda, freeze_penalized, sweeps, nullptr, inner_tol);
            center_intercept();

            old_eta.swap(eta);
            for (std::size_t i = 0; i < n; ++i)
                eta[i] = z[i] - q[i] + b0;
            double next = binomial_objective(eta, lambda);
            // step halving keeps the true objective monotone
            for (int halve = 0; halve < 30 && next > obj + 1e-13 * std::abs(obj); ++halve) {
                for (std::size_t j = 0; j < m; ++j)
                    beta[j] = 0.5 * (beta[j] + old_beta[j]);
                b0 = 0.5 * (b0 + old_b0);
                for (std::size_t i = 0; i < n; ++i)
                    eta[i] = 0.5 * (eta[i] + old_eta[i]);
                next = binomial_objective(eta, lambda);
            }
            double change = std::abs(b0 - old_b0);
            for (std::size_t j = 0; j < m; ++j)
                change = std::max(change, std::abs(beta[j] - old_beta[j]) * scale[j]);
            obj = std::min(next, obj);
            trace.push_back(next);
            for (double e : eta)
                if (std::abs(e) >= kEtaCap) {
                    separation = true;
                    break;
                }
            if (change < spec.tol && inner_tol <= spec.tol) {
                converged = true;
                ++outer;
                break;
            }
            inner_tol = std::max(spec.tol, std::min(inner_tol, 0.01 * change));
        }

        // the incremental predictor carries rounding; report the exact one
        eta = linear_predictor();
        r = make_result(lambda);
        r.converged = converged && inner_ok;
        r.sweeps = sweeps;
        r.outer_iterations = outer;
        r.separation = separation;
        r.objective = binomial_objective(eta, lambda);
        r.objective_trace = std::move(trace);
        if (separation)
            r.warnings.push_back(
                "linear predictor reached |mu| = 30: possible complete separation");
        if (!r.converged)
            r.warnings.push_back(fmt::format(
                "IRLS did not converge in {} iterations at lambda={}", outer, lambda));
        return r;
    }

    FitResult solve(double lambda, bool freeze_penalized = false)
    {
        if (!(lambda >= 0.0) || std::isnan(lambda))
            throw ConfigError(fmt::format("lambda must be nonnegative, got {}", lambda));
        return spec.family == Family::gaussian ? solve_gaussian(lambda, freeze_penalized)
                                               : solve_binomial(lambda, freeze_penalized);
    }
};

PathSolver::PathSolver(const DesignMatrix& x, std::span<const double> y, FitSpec spec)
    : impl_(std::make_unique<Impl>(x, y, std::move(spec)))
{}

PathSolver::~PathSolver() = default;
PathSolver::PathSolver(PathSolver&&) noexcept = default;
PathSolver& PathSolver::operator=(PathSolver&&) noexcept = default;

FitResult PathSolver::solve(double lambda) { return impl_->solve(lambda); }

FitResult fit_gaussian(const DesignMatrix& x, std::span<const double> y, const FitSpec& spec)
{
    FitSpec s = spec;
    s.family = Family::gaussian;
    PathSolver::Impl impl(x, y, s);
    return impl.solve(spec.lambda);
}

FitResult fit_binomial(const DesignMatrix& x, std::span<const double> y01, const FitSpec& spec)
{
    FitSpec s = spec;
    s.family = Family::binomial;
    PathSolver::Impl impl(x, y01, s);
    return impl.solve(spec.lambda);
}

FitResult fit(const DesignMatrix& x, std::span<const double> y, const FitSpec& spec)
{
    return spec.family == Family::gaussian ? fit_gaussian(x, y, spec) : fit_binomial(x, y, spec);
}

std::vector<FitResult> fit_path(const DesignMatrix& x, std::span<const double> y,
                                const FitSpec& spec, std::span<const double> lambdas)
{
    PathSolver solver(x, y, spec);
    std::vector<FitResult> out;
    out.reserve(lambdas.size());
    for (double l : lambdas)
        out.push_back(solver.solve(l));
    return out;
}

double lambda_max(const DesignMatrix& x, std::span<const double> y, const FitSpec& spec)
{
    if (!(spec.alpha > 0.0))
        throw ConfigError("lambda_max is undefined for alpha = 0");
    PathSolver::Impl impl(x, y, spec);
    const FitResult null_fit = impl.solve(0.0, /*freeze_penalized=*/true);

    std::vector<double> mu = predict_linear(null_fit, x);
    std::vector<double> r(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        r[i] = y[i] - (spec.family == Family::binomial ? logistic(mu[i]) : mu[i]);

    const double inv_n = 1.0 / static_cast<double>(x.rows());
    double best = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) {
        if (!impl.pw.penalized[j] || impl.pw.l1[j] <= 0.0)
            continue;
        auto idx = x.column_rows(j);
        auto val = x.column_values(j);
        double g = 0.0;
        for (std::size_t k = 0; k < idx.size(); ++k)
            g += val[k] * r[idx[k]];
        best = std::max(best, std::abs(g * inv_n) / (spec.alpha * impl.pw.l1[j]));
    }
    // absorbs rounding differences between this gradient and the solver's own
    return best * (1.0 + 1e-9);
}

} // namespace rapm
