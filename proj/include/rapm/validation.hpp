#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rapm/design.hpp"
#include "rapm/ratings.hpp"
#include "rapm/registry.hpp"

namespace rapm {

/// Auxiliary data used by the external criteria. Keys are player keys.
struct ValidationInputs {
    std::vector<std::string> all_nba;
    std::map<std::string, char> positions;  ///< 'G', 'F' or 'C'
    std::map<std::string, double> minutes;
    std::map<std::string, std::string> teams;
    std::map<std::string, std::array<std::optional<double>, kBoxStatCount>> box_stats;
    std::set<std::string> starters;  ///< six most-played players of each team
    std::vector<std::string> warnings;
};

/// Position letter from a listing such as "G", "F-C" or "Center"; nullopt when unknown.
std::optional<char> position_code(std::string_view listing);

/// Six players with most minutes per team (all of them for smaller rosters);
/// ties broken by key.
std::set<std::string> derive_starters(const std::map<std::string, double>& minutes,
                                      const std::map<std::string, std::string>& teams);

ValidationInputs make_validation_inputs(const std::vector<BoxScoreRow>& box_score,
                                        std::vector<std::string> all_nba = {});

/// One key per line; blank lines and lines starting with '#' are skipped.
/// Throws InputError unless exactly 15 keys are listed.
std::vector<std::string> read_all_nba(const std::filesystem::path& path);
std::vector<std::string> read_all_nba(std::istream& in);

/// Player keys for one side ordered best first by `kind`; ties broken by key.
/// Rows without a value for `kind` are left out.
std::vector<std::string> ranked_players(const RatingTable& table, RatingKind kind, Side side);

struct CriterionAllNbaOptions {
    bool offense_only = false;  ///< default: offense plus oriented defense
    std::size_t guards = 6;
    std::size_t forwards = 6;
    std::size_t centers = 3;
};

struct Selection {
    double pct = 0.0;
    std::size_t hits = 0;
    std::size_t size = 0;  ///< denominator actually used
};

/// Share of the all-NBA list among the best players per position.
/// Throws InputError naming rated players without a position.
Selection criterion_all_nba(const RatingTable& table, RatingKind kind,
                            const ValidationInputs& inputs,
                            const CriterionAllNbaOptions& options = {});

/// Share of the top `top_n` players per side that are among the
/// `bottom_minutes_n` rated players with fewest minutes.
Selection criterion_low_time(const RatingTable& table, RatingKind kind,
                             const ValidationInputs& inputs, std::size_t top_n = 50,
                             std::size_t bottom_minutes_n = 50);

struct StarterShares {
    Selection top;
    Selection bottom;
};

/// Share of starters among the top and the bottom `n` players per side.
StarterShares criterion_starters(const RatingTable& table, RatingKind kind,
                                 const ValidationInputs& inputs, std::size_t n = 50);

/// Per-stat overlap of the top `top_n` by the statistic with the top `top_n`
/// ratings of the matching side (pts, ast, oreb: offense; dreb, stl, blk: defense).
/// Stats absent from the inputs are skipped with a warning in `warnings`.
std::map<std::string, Selection> criterion_box_score(const RatingTable& table, RatingKind kind,
                                                     const ValidationInputs& inputs,
                                                     std::size_t top_n = 50,
                                                     std::vector<std::string>* warnings = nullptr);

struct GoodnessOfFit {
    std::array<double, 4> observed{};       ///< counts of 0, 1, 2, 3+ points
    std::array<double, 4> expected{};       ///< mean simulated counts
    std::vector<std::array<double, 4>> simulated_freqs;  ///< per replicate, sums to 1
    std::vector<double> simulated_chi2;
    double chi2_observed = 0.0;
    double p_value = 0.0;
    std::size_t n_sims = 0;
    std::uint64_t seed = 0;
};

/// Parametric bootstrap chi-square test on the marginal score-category counts.
/// Replicate r draws with std::mt19937_64(seed + r).
GoodnessOfFit goodness_of_fit(std::span<const std::array<double, 4>> row_probs,
                              std::span<const int> observed_pts, std::size_t n_sims = 1000,
                              std::uint64_t seed = 1);
GoodnessOfFit goodness_of_fit(const MultinomialFit& fit, const DesignMatrix& x,
                              std::span<const int> observed_pts, std::size_t n_sims = 1000,
                              std::uint64_t seed = 1);

nlohmann::json gof_to_json(const GoodnessOfFit& g);

/// Per-row multinomial expectation sum_l value_l * pi_il.
std::vector<double> expected_points_per_row(const MultinomialFit& fit, const DesignMatrix& x);

double model_rmse(std::span<const double> predicted, std::span<const int> observed);

struct ValidationReport {
    std::string label;  ///< rating method, e.g. "lasso wepts"
    RatingKind kind = RatingKind::rapm;
    std::optional<Selection> criterion1;
    std::optional<Selection> criterion2;
    std::optional<StarterShares> criterion3;
    std::map<std::string, Selection> criterion4;
    std::vector<std::string> warnings;
};

struct ValidationOptions {
    CriterionAllNbaOptions all_nba;
    std::size_t top_n = 50;
    std::size_t bottom_minutes_n = 50;
};

/// Runs every criterion the inputs allow; skipped ones are noted in warnings.
ValidationReport validate_ratings(const RatingTable& table, RatingKind kind, std::string label,
                                  const ValidationInputs& inputs,
                                  const ValidationOptions& options = {});

nlohmann::json report_to_json(const std::vector<ValidationReport>& reports);

/// Criteria as columns, rating methods as rows.
std::string report_to_text(const std::vector<ValidationReport>& reports);

} // namespace rapm
