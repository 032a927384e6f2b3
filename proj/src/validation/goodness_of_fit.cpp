#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "rapm/errors.hpp"
#include "rapm/parallel.hpp"
#include "rapm/validation.hpp"

namespace rapm {

namespace {

double chi_square(const std::array<double, 4>& counts, const std::array<double, 4>& expected)
{
    double s = 0.0;
    for (std::size_t c = 0; c < 4; ++c) {
        const double d = counts[c] - expected[c];
        if (expected[c] > 0.0)
            s += d * d / expected[c];
        else if (counts[c] != 0.0)
            return std::numeric_limits<double>::infinity();
    }
    return s;
}

} // namespace

GoodnessOfFit goodness_of_fit(std::span<const std::array<double, 4>> row_probs,
                              std::span<const int> observed_pts, std::size_t n_sims,
                              std::uint64_t seed)
{
    if (row_probs.size() != observed_pts.size())
        throw InputError("probabilities and observations differ in length");
    if (n_sims == 0)
        throw ConfigError("goodness of fit needs at least one simulation");
    const std::size_t n = row_probs.size();

    // cumulative thresholds per row, shared by all replicates
    std::vector<std::array<double, 3>> cdf(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = row_probs[i];
        cdf[i] = {p[0], p[0] + p[1], p[0] + p[1] + p[2]};
    }

    GoodnessOfFit g;
    g.n_sims = n_sims;
    g.seed = seed;
    for (int pts : observed_pts)
        g.observed[static_cast<std::size_t>(score_category(pts))] += 1.0;

    std::vector<std::array<double, 4>> counts(n_sims);
    parallel_for(n_sims, [&](std::size_t r) {
        std::mt19937_64 rng(seed + r);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::array<double, 4> c{};
        for (std::size_t i = 0; i < n; ++i) {
            const double u = unif(rng);
            const auto& t = cdf[i];
            c[u < t[0] ? 0 : u < t[1] ? 1 : u < t[2] ? 2 : 3] += 1.0;
        }
        counts[r] = c;
    });

    for (const auto& c : counts)
        for (std::size_t k = 0; k < 4; ++k)
            g.expected[k] += c[k];
    for (double& e : g.expected)
        e /= static_cast<double>(n_sims);

    g.chi2_observed = chi_square(g.observed, g.expected);
    std::size_t extreme = 0;
    g.simulated_chi2.reserve(n_sims);
    g.simulated_freqs.reserve(n_sims);
    for (const auto& c : counts) {
        const double s = chi_square(c, g.expected);
        g.simulated_chi2.push_back(s);
        extreme += s >= g.chi2_observed;
        std::array<double, 4> f{};
        for (std::size_t k = 0; k < 4; ++k)
            f[k] = n ? c[k] / static_cast<double>(n) : 0.0;
        g.simulated_freqs.push_back(f);
    }
    g.p_value = static_cast<double>(extreme) / static_cast<double>(n_sims);
    return g;
}

GoodnessOfFit goodness_of_fit(const MultinomialFit& fit, const DesignMatrix& x,
                              std::span<const int> observed_pts, std::size_t n_sims,
                              std::uint64_t seed)
{
    const auto probs = row_probabilities(fit, x);
    return goodness_of_fit(probs, observed_pts, n_sims, seed);
}

nlohmann::json gof_to_json(const GoodnessOfFit& g)
{
    std::array<double, 4> mean_freq{};
    for (const auto& f : g.simulated_freqs)
        for (std::size_t k = 0; k < 4; ++k)
            mean_freq[k] += f[k] / static_cast<double>(g.simulated_freqs.size());
    const auto chi2 = [](double v) {
        return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json("inf");
    };
    return {{"categories", {"0", "1", "2", "3+"}},
            {"observed", g.observed},
            {"expected", g.expected},
            {"mean_simulated_freq", mean_freq},
            {"chi2_observed", chi2(g.chi2_observed)},
            {"p_value", g.p_value},
            {"n_sims", g.n_sims},
            {"seed", g.seed}};
}

std::vector<double> expected_points_per_row(const MultinomialFit& fit, const DesignMatrix& x)
{
    const auto probs = row_probabilities(fit, x);
    std::vector<double> e(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i)
        e[i] = expected_points(probs[i], fit.c3);
    return e;
}

double model_rmse(std::span<const double> predicted, std::span<const int> observed)
{
    if (predicted.size() != observed.size())
        throw InputError("predictions and observations differ in length");
    if (predicted.empty())
        return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double d = predicted[i] - observed[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(predicted.size()));
}

} // namespace rapm
