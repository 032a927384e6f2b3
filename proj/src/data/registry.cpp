#include "rapm/registry.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include <fmt/core.h>

#include "rapm/csv.hpp"
#include "rapm/errors.hpp"

namespace rapm {

namespace {

std::optional<double> parse_double(std::string_view s)
{
    s = csv::trim(s);
    if (s.empty() || s == "NA")
        return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        return std::nullopt;
    return v;
}

} // namespace

std::vector<BoxScoreRow> parse_box_score(std::istream& in)
{
    csv::Reader reader(in);
    reader.require({"player", "team", "minutes"});
    const auto c_player = *reader.column("player");
    const auto c_team = *reader.column("team");
    const auto c_minutes = *reader.column("minutes");
    const auto c_position = reader.column("position");
    const auto c_rank = reader.column("games_started_rank");
    std::array<std::optional<std::size_t>, kBoxStatCount> c_stats;
    for (std::size_t s = 0; s < kBoxStatCount; ++s)
        c_stats[s] = reader.column(kBoxStatNames[s]);

    std::vector<BoxScoreRow> rows;
    std::vector<std::string> f;
    while (reader.next(f)) {
        auto field = [&](std::size_t c) -> std::string_view {
            return c < f.size() ? std::string_view(f[c]) : std::string_view();
        };
        BoxScoreRow row;
        row.team = std::string(field(c_team));
        const std::string_view name = field(c_player);
        if (name.empty())
            throw InputError(fmt::format("box score line {}: empty player", reader.line_number()));
        if (!row.team.empty() && team_of(name) != row.team)
            row.player = row.team + " " + std::string(name);
        else
            row.player = std::string(name);
        if (row.team.empty())
            row.team = std::string(team_of(row.player));
        auto minutes = parse_double(field(c_minutes));
        if (!minutes || *minutes < 0)
            throw InputError(fmt::format("box score line {}: invalid minutes '{}'",
                                         reader.line_number(), field(c_minutes)));
        row.minutes = *minutes;
        if (c_position)
            row.position = std::string(field(*c_position));
        for (std::size_t s = 0; s < kBoxStatCount; ++s)
            if (c_stats[s])
                row.stats[s] = parse_double(field(*c_stats[s]));
        if (c_rank)
            if (auto r = parse_double(field(*c_rank)))
                row.games_started_rank = static_cast<int>(*r);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<BoxScoreRow> parse_box_score(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open box-score file: " + path.string());
    return parse_box_score(in);
}

std::optional<std::size_t> PlayerRegistry::find(std::string_view key) const
{
    auto it = index_.find(std::string(key));
    if (it == index_.end())
        return std::nullopt;
    return it->second;
}

const PlayerRecord& PlayerRegistry::at(std::string_view key) const
{
    auto i = find(key);
    if (!i)
        throw InputError(fmt::format("unknown player '{}'", key));
    return players_[*i];
}

const TeamCounts& PlayerRegistry::team_counts(const std::string& team) const
{
    auto it = teams_.find(team);
    if (it == teams_.end())
        throw InputError(fmt::format("unknown team '{}'", team));
    return it->second;
}

bool PlayerRegistry::has_all_minutes() const
{
    return std::all_of(players_.begin(), players_.end(),
                       [](const PlayerRecord& p) { return p.minutes.has_value(); });
}

void PlayerRegistry::reindex()
{
    std::sort(players_.begin(), players_.end(),
              [](const PlayerRecord& a, const PlayerRecord& b) { return a.key < b.key; });
    index_.clear();
    for (std::size_t i = 0; i < players_.size(); ++i) {
        players_[i].offense_index = i;
        players_[i].defense_index = i;
        index_.emplace(players_[i].key, i);
    }
}

PlayerRegistry PlayerRegistry::restricted_to(const std::vector<std::string>& keys) const
{
    PlayerRegistry out;
    out.teams_ = teams_;
    out.warnings = warnings;
    for (const auto& k : keys)
        out.players_.push_back(at(k));
    out.reindex();
    return out;
}

PlayerRegistry build_registry(const PossessionLog& log, const std::vector<BoxScoreRow>* box_score)
{
    if (log.rows.empty())
        throw InputError("cannot build a player registry from zero possessions");

    std::vector<std::size_t> n_off(log.player_count(), 0), n_def(log.player_count(), 0);
    PlayerRegistry reg;
    for (const auto& p : log.rows) {
        for (PlayerId id : p.offense)
            ++n_off[id];
        for (PlayerId id : p.defense)
            ++n_def[id];
        ++reg.teams_[log.team_key(p.offense_team)].n_offense;
        ++reg.teams_[log.team_key(p.defense_team)].n_defense;
    }
    for (PlayerId id = 0; id < log.player_count(); ++id) {
        if (n_off[id] + n_def[id] == 0)
            continue;
        PlayerRecord rec;
        rec.key = log.player_key(id);
        rec.team = std::string(team_of(rec.key));
        rec.n_offense = n_off[id];
        rec.n_defense = n_def[id];
        reg.players_.push_back(std::move(rec));
    }
    reg.reindex();

    if (box_score) {
        for (const auto& row : *box_score) {
            if (auto i = reg.find(row.player))
                reg.players_[*i].minutes = row.minutes;
            else
                reg.warnings.push_back(
                    fmt::format("box score player '{}' does not appear in any possession",
                                row.player));
        }
    }
    return reg;
}

FilterResult filter_low_time(const PlayerRegistry& registry, const LowTimeFilter& filter)
{
    const bool use_minutes = registry.has_all_minutes();
    if (!use_minutes && !filter.proxy_min_possessions) {
        std::string missing;
        std::size_t count = 0;
        for (const auto& p : registry.players())
            if (!p.minutes) {
                if (count < 5)
                    missing += (count ? ", " : "") + p.key;
                ++count;
            }
        throw ConfigError(fmt::format(
            "low-time filter needs minutes for every player ({} missing, e.g. {}) "
            "or a possession-count proxy threshold",
            count, missing));
    }

    std::vector<std::string> kept, removed;
    for (const auto& p : registry.players()) {
        const bool low = use_minutes
                             ? *p.minutes < filter.threshold_minutes
                             : p.n_offense + p.n_defense < *filter.proxy_min_possessions;
        (low ? removed : kept).push_back(p.key);
    }
    return {registry.restricted_to(kept), std::move(removed)};
}

} // namespace rapm
