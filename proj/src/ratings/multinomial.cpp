#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "rapm/errors.hpp"
#include "rapm/ratings.hpp"

namespace rapm {

const char* to_string(SignConvention s) { return s == SignConvention::model ? "model" : "paper"; }

SignConvention sign_convention_from_string(const std::string& s)
{
    if (s == "model")
        return SignConvention::model;
    if (s == "paper")
        return SignConvention::paper;
    throw ConfigError(fmt::format("unknown sign convention '{}' (expected model or paper)", s));
}

std::array<double, 4> category_probs(double mu1, double mu2, double mu3)
{
    const double top = std::max({0.0, mu1, mu2, mu3});
    std::array<double, 4> e = {std::exp(-top), std::exp(mu1 - top), std::exp(mu2 - top),
                               std::exp(mu3 - top)};
    const double total = e[0] + e[1] + e[2] + e[3];
    for (double& v : e)
        v /= total;
    return e;
}

double expected_points(const std::array<double, 4>& probs, double c3)
{
    return probs[1] + 2.0 * probs[2] + c3 * probs[3];
}

double MultinomialFit::intercept(int component) const
{
    const auto& c = components[static_cast<std::size_t>(component)];
    return c ? c->intercept : -std::numeric_limits<double>::infinity();
}

double top_category_points(std::span<const int> pts)
{
    double sum = 0.0;
    std::size_t count = 0;
    bool above_three = false;
    for (int p : pts) {
        if (p >= 3) {
            sum += p;
            ++count;
        }
        above_three |= p > 3;
    }
    if (!above_three)
        return kDefaultTopCategoryPoints;
    return sum / static_cast<double>(count);
}

void attach_players(MultinomialFit& fit, const DesignMatrix& x, const PlayerRegistry& registry)
{
    if (x.player_count() != registry.size())
        throw InputError(fmt::format("design has {} player columns per side, registry {} players",
                                     x.player_count(), registry.size()));
    fit.players.clear();
    for (const auto& p : registry.players()) {
        PlayerEffects e;
        for (int l = 0; l < 3; ++l) {
            const auto& c = fit.components[static_cast<std::size_t>(l)];
            if (!c)
                continue;
            e.offense[static_cast<std::size_t>(l)] = c->coefficients[x.offense_column(p.offense_index)];
            e.defense[static_cast<std::size_t>(l)] = c->coefficients[x.defense_column(p.defense_index)];
        }
        fit.players.emplace(p.key, e);
    }
}

MultinomialFit fit_multinomial(const DesignMatrix& x, const ResponseSet& y,
                               const PlayerRegistry& registry, const MultinomialOptions& options)
{
    FitSpec spec = options.spec;
    spec.family = Family::binomial;
    spec.validate();

    MultinomialFit out;
    out.c3 = options.c3 ? *options.c3 : top_category_points(y.pts);
    if (out.c3 < 3.0)
        throw ConfigError(fmt::format("top-category points must be at least 3, got {}", out.c3));

    const bool any_cv = std::any_of(options.lambda.begin(), options.lambda.end(),
                                    [](const auto& l) { return !l.has_value(); });
    std::vector<int> folds;
    if (any_cv)
        folds = kfold_split(x.rows(), options.folds, options.seed);

    for (std::size_t l = 0; l < 3; ++l) {
        const auto& sub = y.categories[l];
        const auto positives = static_cast<std::size_t>(
            std::count(sub.indicator.begin(), sub.indicator.end(), 1.0));
        if (positives == 0 || positives == sub.rows.size()) {
            out.warnings.push_back(fmt::format(
                "component {}: no {} rows; its probability is fixed to zero", l + 1,
                positives == 0 ? "scoring" : "non-scoring"));
            continue;
        }
        const DesignMatrix xl = x.select_rows(sub.rows);
        double lambda;
        if (options.lambda[l]) {
            lambda = *options.lambda[l];
            out.components[l] = fit_binomial(xl, sub.indicator, [&] {
                FitSpec s = spec;
                s.lambda = lambda;
                return s;
            }());
        } else {
            const auto path = lambda_path(xl, sub.indicator, spec, options.n_lambda,
                                          options.lambda_ratio);
            std::vector<int> sub_folds(sub.rows.size());
            for (std::size_t k = 0; k < sub.rows.size(); ++k)
                sub_folds[k] = folds[sub.rows[k]];
            CvResult cv = cross_validate(xl, sub.indicator, spec, path, sub_folds, options.folds,
                                         options.seed, options.metric);
            for (const auto& w : cv.warnings)
                out.warnings.push_back(fmt::format("component {}: {}", l + 1, w));
            // walk the path down to the selected lambda with warm starts
            const std::size_t target = options.use_1se ? cv.index_1se : cv.index_min;
            PathSolver solver(xl, sub.indicator, spec);
            FitResult f;
            for (std::size_t k = 0; k <= target; ++k)
                f = solver.solve(path[k]);
            out.components[l] = std::move(f);
            out.cv[l] = std::move(cv);
        }
        for (const auto& w : out.components[l]->warnings)
            out.warnings.push_back(fmt::format("component {}: {}", l + 1, w));
    }
    attach_players(out, x, registry);
    return out;
}

std::vector<std::array<double, 4>> row_probabilities(const MultinomialFit& fit,
                                                     const DesignMatrix& x)
{
    constexpr double kAbsent = -std::numeric_limits<double>::infinity();
    std::array<std::vector<double>, 3> mu;
    for (std::size_t l = 0; l < 3; ++l) {
        if (fit.components[l])
            mu[l] = predict_linear(*fit.components[l], x);
        else
            mu[l].assign(x.rows(), kAbsent);
    }
    std::vector<std::array<double, 4>> probs(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i)
        probs[i] = category_probs(mu[0][i], mu[1][i], mu[2][i]);
    return probs;
}

double epts_reference(const MultinomialFit& fit)
{
    return expected_points(category_probs(fit.intercept(0), fit.intercept(1), fit.intercept(2)),
                           fit.c3);
}

double epts_from_effects(const MultinomialFit& fit, const std::array<double, 3>& effect, Side side,
                         SignConvention sign)
{
    const double s = side == Side::offense || sign == SignConvention::paper ? 1.0 : -1.0;
    std::array<double, 3> mu;
    for (int l = 0; l < 3; ++l)
        mu[static_cast<std::size_t>(l)] = fit.intercept(l) + s * effect[static_cast<std::size_t>(l)];
    return expected_points(category_probs(mu[0], mu[1], mu[2]), fit.c3);
}

double epts_player(const MultinomialFit& fit, const std::string& key, Side side,
                   SignConvention sign)
{
    auto it = fit.players.find(key);
    if (it == fit.players.end())
        throw InputError(fmt::format("player '{}' is not part of the multinomial fit", key));
    const auto& e = side == Side::offense ? it->second.offense : it->second.defense;
    return epts_from_effects(fit, e, side, sign);
}

double participation_weight(const PlayerRegistry& registry, const std::string& key, Side side)
{
    const PlayerRecord& p = registry.at(key);
    const TeamCounts& t = registry.team_counts(p.team);
    const std::size_t team_n = side == Side::offense ? t.n_offense : t.n_defense;
    if (team_n == 0)
        throw InputError(fmt::format("team '{}' has no {} possessions", p.team, to_string(side)));
    const std::size_t own = side == Side::offense ? p.n_offense : p.n_defense;
    return static_cast<double>(own) / static_cast<double>(team_n);
}

double weighted_epts(double weight, double epts, double epts0)
{
    // stays inside [min, max] of the two after rounding
    return epts0 + weight * (epts - epts0);
}

double wepts_player(const MultinomialFit& fit, const PlayerRegistry& registry,
                    const std::string& key, Side side, SignConvention sign)
{
    return weighted_epts(participation_weight(registry, key, side),
                         epts_player(fit, key, side, sign), epts_reference(fit));
}

nlohmann::json multinomial_to_json(const MultinomialFit& fit, const DesignMatrix& x)
{
    nlohmann::json comps = nlohmann::json::array();
    for (std::size_t l = 0; l < 3; ++l) {
        if (!fit.components[l]) {
            comps.push_back(nullptr);
            continue;
        }
        nlohmann::json c = fit_to_json(*fit.components[l], x);
        c["category"] = l + 1;
        if (fit.cv[l]) {
            c["lambda_min"] = fit.cv[l]->lambda_min;
            c["lambda_1se"] = fit.cv[l]->lambda_1se;
        }
        comps.push_back(std::move(c));
    }
    return {{"model", "multinomial"},
            {"c3", fit.c3},
            {"epts0", epts_reference(fit)},
            {"components", std::move(comps)},
            {"warnings", fit.warnings}};
}

MultinomialFit multinomial_from_json(const nlohmann::json& j, const DesignMatrix& x,
                                     const PlayerRegistry& registry)
{
    MultinomialFit fit;
    try {
        fit.c3 = j.at("c3").get<double>();
        const auto& comps = j.at("components");
        if (!comps.is_array() || comps.size() != 3)
            throw InputError("multinomial JSON needs exactly three components");
        for (std::size_t l = 0; l < 3; ++l) {
            if (comps[l].is_null())
                continue;
            std::vector<std::string> unmatched;
            fit.components[l] = fit_from_json(comps[l], x, &unmatched);
            if (!unmatched.empty())
                fit.warnings.push_back(fmt::format(
                    "component {}: {} coefficient(s) name columns absent from the design", l + 1,
                    unmatched.size()));
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed multinomial JSON: ") + e.what());
    }
    attach_players(fit, x, registry);
    return fit;
}

} // namespace rapm
