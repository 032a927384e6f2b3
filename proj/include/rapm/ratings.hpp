#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rapm/design.hpp"
#include "rapm/glm.hpp"
#include "rapm/model_selection.hpp"
#include "rapm/registry.hpp"

namespace rapm {

/// How a defensive coefficient enters a player's linear predictor.
///   model: mu = b0 - beta_d (the on-court defensive entry is -1); lower EPTS is better.
///   paper: mu = b0 + beta_d, read literally; higher EPTS is better.
enum class SignConvention { model, paper };

const char* to_string(SignConvention s);
SignConvention sign_convention_from_string(const std::string& s);

inline constexpr double kDefaultTopCategoryPoints = 3.01;

/// Probabilities of 0, 1, 2 and 3+ points given the three category predictors
/// (category 0 is the baseline with predictor 0). -inf marks an absent category.
std::array<double, 4> category_probs(double mu1, double mu2, double mu3);

/// sum_l value_l * pi_l with values (0, 1, 2, c3).
double expected_points(const std::array<double, 4>& probs, double c3);

struct PlayerEffects {
    std::array<double, 3> offense{};
    std::array<double, 3> defense{};
};

/// Three "l versus no points" binomial components assembled into one model.
struct MultinomialFit {
    std::array<std::optional<FitResult>, 3> components;
    std::array<std::optional<CvResult>, 3> cv;
    double c3 = kDefaultTopCategoryPoints;
    std::map<std::string, PlayerEffects> players;
    std::vector<std::string> warnings;

    /// b0_l, or -inf for an absent component.
    double intercept(int component) const;
};

struct MultinomialOptions {
    FitSpec spec;  ///< alpha, standardize, tolerances; family is forced to binomial
    /// Fixed lambda per component; CV runs for components without one.
    std::array<std::optional<double>, 3> lambda;
    int folds = 10;
    std::uint64_t seed = 1;
    CvMetric metric = CvMetric::rmse;
    std::size_t n_lambda = 100;
    double lambda_ratio = 1e-4;
    bool use_1se = false;  ///< select lambda_1se instead of lambda_min
    std::optional<double> c3;
};

/// Mean of pts over rows with pts >= 3, or 3.01 when no row has pts > 3.
double top_category_points(std::span<const int> pts);

/// Fits the three components on their row subsets with one shared fold assignment.
/// A component whose subset lacks positive (or negative) rows is skipped with a warning
/// and its probability is structurally zero.
MultinomialFit fit_multinomial(const DesignMatrix& x, const ResponseSet& y,
                               const PlayerRegistry& registry, const MultinomialOptions& options);

/// Fills MultinomialFit::players from the component coefficients.
void attach_players(MultinomialFit& fit, const DesignMatrix& x, const PlayerRegistry& registry);

/// Per-row probabilities of 0, 1, 2, 3+ points.
std::vector<std::array<double, 4>> row_probabilities(const MultinomialFit& fit,
                                                     const DesignMatrix& x);

double epts_reference(const MultinomialFit& fit);

/// Expected points of a lineup of reference players plus player `key` on `side`.
/// Throws InputError for an unknown player.
double epts_player(const MultinomialFit& fit, const std::string& key, Side side,
                   SignConvention sign = SignConvention::model);
double epts_from_effects(const MultinomialFit& fit, const std::array<double, 3>& effect,
                         Side side, SignConvention sign);

/// Share of the player's team possessions on `side` with the player on court.
double participation_weight(const PlayerRegistry& registry, const std::string& key, Side side);

/// W * EPTS + (1 - W) * EPTS0.
double weighted_epts(double weight, double epts, double epts0);
double wepts_player(const MultinomialFit& fit, const PlayerRegistry& registry,
                    const std::string& key, Side side, SignConvention sign = SignConvention::model);

struct RapmColumns {
    std::vector<std::string> players;
    std::vector<double> offense;
    std::vector<double> defense;
};

/// Offensive and defensive coefficients per registry player.
RapmColumns extract_rapm(const FitResult& fit, const DesignMatrix& x,
                         const PlayerRegistry& registry);

struct LinearMap {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double residual_sd = 0.0;
    std::size_t n = 0;
};

/// Ordinary least squares of binomial RAPM on normal RAPM.
LinearMap binomial_normal_map(std::span<const double> rapm_normal,
                              std::span<const double> rapm_binomial);

/// Unpenalized refit on the `support` columns; other coefficients are zero.
/// Rank deficiency on the support falls back to a ridge of 1e-8 with a warning.
FitResult after_lasso_refit(const DesignMatrix& x, std::span<const double> y, Family family,
                            std::span<const std::size_t> support);

/// Nonzero columns of a fit.
std::vector<std::size_t> support_of(const FitResult& fit);

/// 1 - |beta_fit|_1 / |beta_reference|_1 over the player columns, where the
/// reference is typically the unpenalized fit. Throws InputError when the
/// reference has no nonzero player coefficient.
double shrinkage_fraction(const FitResult& fit, const FitResult& reference, const DesignMatrix& x);

/// Pearson correlation. With include_zeros = false, pairs where `sparse` is
/// exactly zero are dropped.
double rating_correlation(std::span<const double> dense, std::span<const double> sparse,
                          bool include_zeros);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------- rating table

enum class RatingKind { rapm, rapm_binomial, epts, wepts };
const char* to_string(RatingKind k);
RatingKind rating_kind_from_string(const std::string& s);

/// Whether larger values are better for this rating on this side.
bool higher_is_better(RatingKind kind, Side side, SignConvention sign);

struct RatingRow {
    std::string player;
    std::string team;
    Side side = Side::offense;
    std::optional<double> rapm;
    std::optional<double> rapm_binomial;
    std::optional<double> epts;
    std::optional<double> wepts;
    double weight = 0.0;
    bool is_reference = false;
    std::size_t rank = 0;

    std::optional<double> value(RatingKind kind) const;
};

struct RatingTable {
    std::vector<RatingRow> rows;  ///< offense rows then defense rows, each by player key
    RatingKind primary = RatingKind::rapm;
    SignConvention sign = SignConvention::model;
    nlohmann::json metadata = nlohmann::json::object();

    /// Recomputes RatingRow::rank from the primary rating (1 = best, per side).
    void assign_ranks();
    bool has(RatingKind kind) const;
};

/// Multiplies rapm and rapm_binomial values by `factor` (e.g. 100 for points
/// per 100 possessions). Throws ConfigError unless factor > 0.
void scale_rapm(RatingTable& table, double factor);

/// RAPM table from a normal fit, optionally with binomial RAPM from a binomial fit
/// on the same design. Primary rating: rapm (rapm_binomial when only binomial is given).
RatingTable rapm_table(const FitResult* normal, const FitResult* binomial, const DesignMatrix& x,
                       const PlayerRegistry& registry);

/// EPTS / wEPTS table; primary rating wEPTS.
RatingTable multinomial_table(const MultinomialFit& fit, const PlayerRegistry& registry,
                              SignConvention sign);

/// Combines rows of traded players (same name after the team prefix) by averaging
/// ratings weighted by per-team possessions on that side. The merged row is keyed by
/// the bare name and lists its teams joined by '/'; players with one team keep their
/// key. Names must identify players across teams.
RatingTable merge_traded(const RatingTable& table, const PlayerRegistry& registry);

std::string rating_table_to_csv(const RatingTable& table);
RatingTable rating_table_from_csv(std::istream& in);
nlohmann::json rating_table_to_json(const RatingTable& table);

nlohmann::json multinomial_to_json(const MultinomialFit& fit, const DesignMatrix& x);
MultinomialFit multinomial_from_json(const nlohmann::json& j, const DesignMatrix& x,
                                     const PlayerRegistry& registry);

} // namespace rapm
