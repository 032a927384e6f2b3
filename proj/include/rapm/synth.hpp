#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace rapm {

/// Synthetic league: teams play games of alternating possessions; lineups change
/// every few possessions, drawn by playing-time weight (starters, bench, low-time).
struct SynthConfig {
    int n_teams = 30;
    int players_per_team = 13;
    std::size_t n_possessions = 20000;
    double sparsity = 0.15;          ///< share of players with nonzero offensive effects
    double defense_sparsity = 0.0;   ///< share with nonzero defensive effects
    double coef_min = 0.3;           ///< |beta| drawn uniformly from [coef_min, coef_max]
    double coef_max = 0.6;
    double ltp_fraction = 0.15;      ///< planted low-time players per roster
    std::array<bool, 3> signal_components = {false, true, false};  ///< categories 1, 2, 3+
    /// League marginals of 0, 1, 2, 3+ points for the all-reference lineup.
    std::array<double, 4> baseline = {0.596, 0.025, 0.262, 0.117};
    std::size_t possessions_per_game = 200;
    std::size_t stint_length = 8;
    std::uint64_t seed = 1;

    void validate() const;  ///< throws ConfigError
};

struct SynthPlayer {
    std::string key;
    std::string team;
    char position = 'G';
    bool ltp = false;
    std::array<double, 3> beta_offense{};
    std::array<double, 3> beta_defense{};
    double epts_offense = 0.0;  ///< true EPTS with the player alone among reference players
    double epts_defense = 0.0;  ///< model sign convention (defense enters with -1)
    std::size_t n_offense = 0;
    std::size_t n_defense = 0;
    double minutes = 0.0;
};

struct SynthData {
    std::string possessions_csv;
    std::string box_score_csv;
    std::string all_nba;  ///< 15 keys, one per line
    nlohmann::json ledger;
    std::vector<SynthPlayer> players;
    std::array<double, 3> intercepts{};
    double c3 = 0.0;
    double epts0 = 0.0;
};

SynthData generate_synthetic(const SynthConfig& config);

} // namespace rapm
