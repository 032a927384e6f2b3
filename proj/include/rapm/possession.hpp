#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rapm {

using PlayerId = std::uint32_t;
using TeamId = std::uint32_t;

enum class SeasonType : std::uint8_t { regular, playoff };

/// One offensive possession. Player and team fields are ids into the owning PossessionLog.
struct Possession {
    bool offense_is_home = false;
    int points = 0;
    SeasonType season_type = SeasonType::regular;
    std::array<PlayerId, 5> offense{};
    std::array<PlayerId, 5> defense{};
    TeamId offense_team = 0;
    TeamId defense_team = 0;
};

struct RowError {
    std::size_t line = 0;
    std::string message;
};

/// Parsed possessions with interned player and team keys.
///
/// Ids are assigned in order of first appearance, so identical input bytes
/// always produce identical ids.
class PossessionLog {
public:
    std::vector<Possession> rows;
    std::vector<RowError> errors;

    const std::string& player_key(PlayerId id) const { return players_[id]; }
    const std::string& team_key(TeamId id) const { return teams_[id]; }
    std::size_t player_count() const { return players_.size(); }
    std::size_t team_count() const { return teams_.size(); }
    const std::vector<std::string>& player_keys() const { return players_; }

    PlayerId intern_player(std::string_view key);
    TeamId intern_team(std::string_view key);

private:
    std::vector<std::string> players_;
    std::vector<std::string> teams_;
    std::unordered_map<std::string, PlayerId> player_index_;
    std::unordered_map<std::string, TeamId> team_index_;
};

/// Leading token of a player key, e.g. "LAC22" for "LAC22 Ivica-Zubac".
std::string_view team_of(std::string_view player_key);

/// Parses the possession CSV. Format errors (missing columns) throw InputError;
/// malformed rows are skipped and recorded in PossessionLog::errors.
PossessionLog parse_possessions(std::istream& in);
PossessionLog parse_possessions(const std::filesystem::path& path);

inline constexpr std::array<const char*, 13> kPossessionColumns = {
    "home_off", "pts", "season_type", "O1", "O2", "O3", "O4", "O5",
    "D1", "D2", "D3", "D4", "D5"};

} // namespace rapm
