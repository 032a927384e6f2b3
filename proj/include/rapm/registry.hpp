#pragma once

#include <array>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rapm/possession.hpp"

namespace rapm {

enum class Side { offense, defense };

inline const char* to_string(Side s) { return s == Side::offense ? "offense" : "defense"; }

/// Per-game box-score statistics, in the order of the box-score CSV.
enum BoxStat : std::size_t { kPts, kAst, kOreb, kDreb, kStl, kBlk, kBoxStatCount };

inline constexpr std::array<const char*, kBoxStatCount> kBoxStatNames = {
    "pts_pg", "ast_pg", "oreb_pg", "dreb_pg", "stl_pg", "blk_pg"};

struct BoxScoreRow {
    std::string player;  ///< full player key, team prefix included
    std::string team;
    double minutes = 0.0;
    std::string position;
    std::array<std::optional<double>, kBoxStatCount> stats{};
    std::optional<int> games_started_rank;
};

/// Parses the box-score CSV. `minutes` and `player`/`team` are required;
/// the remaining columns are optional and missing ones stay empty.
///
/// When the `player` field does not already start with "<team> ", the key
/// is formed as "<team> <player>" to match the possession file.
std::vector<BoxScoreRow> parse_box_score(std::istream& in);
std::vector<BoxScoreRow> parse_box_score(const std::filesystem::path& path);

struct PlayerRecord {
    std::string key;
    std::string team;
    std::size_t offense_index = 0;  ///< position in the offensive player block
    std::size_t defense_index = 0;  ///< position in the defensive player block
    std::size_t n_offense = 0;      ///< possessions on court with the offense
    std::size_t n_defense = 0;      ///< possessions on court with the defense
    std::optional<double> minutes;
};

struct TeamCounts {
    std::size_t n_offense = 0;
    std::size_t n_defense = 0;
};

/// Player columns and possession counts. Players are ordered by key.
class PlayerRegistry {
public:
    const std::vector<PlayerRecord>& players() const { return players_; }
    std::size_t size() const { return players_.size(); }
    const PlayerRecord& operator[](std::size_t i) const { return players_[i]; }

    std::optional<std::size_t> find(std::string_view key) const;
    const PlayerRecord& at(std::string_view key) const;  ///< throws InputError

    const TeamCounts& team_counts(const std::string& team) const;  ///< throws InputError
    const std::map<std::string, TeamCounts>& teams() const { return teams_; }

    bool has_all_minutes() const;

    /// Minutes-file rows that matched no player.
    std::vector<std::string> warnings;

    /// Copy keeping only `keys` (in key order), with contiguous re-indexed columns.
    /// Possession counts are preserved.
    PlayerRegistry restricted_to(const std::vector<std::string>& keys) const;

private:
    friend PlayerRegistry build_registry(const PossessionLog&, const std::vector<BoxScoreRow>*);
    void reindex();

    std::vector<PlayerRecord> players_;
    std::unordered_map<std::string, std::size_t> index_;
    std::map<std::string, TeamCounts> teams_;
};

/// Throws InputError when `log` has no possessions.
PlayerRegistry build_registry(const PossessionLog& log,
                              const std::vector<BoxScoreRow>* box_score = nullptr);

struct LowTimeFilter {
    double threshold_minutes = 200.0;
    /// Possession-count proxy (offense + defense possessions) used when minutes
    /// are unavailable. Disabled when unset.
    std::optional<std::size_t> proxy_min_possessions;
};

struct FilterResult {
    PlayerRegistry kept;
    std::vector<std::string> removed;  ///< sorted keys
};

/// Removes players strictly below the threshold. Minutes are used when every
/// player has them; otherwise the proxy, and ConfigError when neither exists.
FilterResult filter_low_time(const PlayerRegistry& registry, const LowTimeFilter& filter);

} // namespace rapm
