#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "rapm/csv.hpp"
#include "rapm/errors.hpp"
#include "rapm/validation.hpp"

namespace rapm {

std::optional<char> position_code(std::string_view listing)
{
    auto t = csv::trim(listing);
    if (t.empty())
        return std::nullopt;
    std::string up;
    for (char c : t)
        up += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    // two-letter listings: PG/SG are guards, SF/PF forwards
    if (up.starts_with("PG") || up.starts_with("SG"))
        return 'G';
    if (up.starts_with("SF") || up.starts_with("PF"))
        return 'F';
    const char c = up.front();
    if (c == 'G' || c == 'F' || c == 'C')
        return c;
    return std::nullopt;
}

std::set<std::string> derive_starters(const std::map<std::string, double>& minutes,
                                      const std::map<std::string, std::string>& teams)
{
    std::map<std::string, std::vector<std::pair<double, std::string>>> by_team;
    for (const auto& [key, m] : minutes) {
        auto it = teams.find(key);
        by_team[it == teams.end() ? std::string(team_of(key)) : it->second].emplace_back(m, key);
    }
    std::set<std::string> starters;
    for (auto& [team, players] : by_team) {
        std::sort(players.begin(), players.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        for (std::size_t i = 0; i < std::min<std::size_t>(6, players.size()); ++i)
            starters.insert(players[i].second);
    }
    return starters;
}

ValidationInputs make_validation_inputs(const std::vector<BoxScoreRow>& box_score,
                                        std::vector<std::string> all_nba)
{
    ValidationInputs in;
    in.all_nba = std::move(all_nba);
    for (const auto& row : box_score) {
        if (in.minutes.contains(row.player)) {
            in.warnings.push_back(fmt::format("duplicate box-score row for '{}' ignored", row.player));
            continue;
        }
        in.minutes[row.player] = row.minutes;
        in.teams[row.player] = row.team;
        if (auto p = position_code(row.position))
            in.positions[row.player] = *p;
        in.box_stats[row.player] = row.stats;
    }
    in.starters = derive_starters(in.minutes, in.teams);
    return in;
}

std::vector<std::string> read_all_nba(std::istream& in)
{
    std::vector<std::string> keys;
    std::string line;
    while (std::getline(in, line)) {
        auto t = csv::trim(line);
        if (t.empty() || t.front() == '#')
            continue;
        keys.emplace_back(t);
    }
    if (keys.size() != 15)
        throw InputError(fmt::format("all-NBA list must name 15 players, found {}", keys.size()));
    return keys;
}

std::vector<std::string> read_all_nba(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open all-NBA file: " + path.string());
    return read_all_nba(in);
}

namespace {

struct Scored {
    std::string key;
    double value;
};

// Best first; ties by key.
void order_best_first(std::vector<Scored>& v, bool higher)
{
    std::sort(v.begin(), v.end(), [&](const Scored& a, const Scored& b) {
        if (a.value != b.value)
            return higher ? a.value > b.value : a.value < b.value;
        return a.key < b.key;
    });
}

std::vector<Scored> side_values(const RatingTable& table, RatingKind kind, Side side)
{
    std::vector<Scored> v;
    for (const auto& r : table.rows)
        if (r.side == side)
            if (auto x = r.value(kind))
                v.push_back({r.player, *x});
    return v;
}

Selection share(std::size_t hits, std::size_t size)
{
    return {size ? 100.0 * static_cast<double>(hits) / static_cast<double>(size) : 0.0, hits, size};
}

std::vector<std::string> take(const std::vector<std::string>& v, std::size_t n, bool from_bottom)
{
    n = std::min(n, v.size());
    if (from_bottom)
        return {v.end() - static_cast<std::ptrdiff_t>(n), v.end()};
    return {v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n)};
}

} // namespace

std::vector<std::string> ranked_players(const RatingTable& table, RatingKind kind, Side side)
{
    auto v = side_values(table, kind, side);
    order_best_first(v, higher_is_better(kind, side, table.sign));
    std::vector<std::string> keys;
    keys.reserve(v.size());
    for (auto& s : v)
        keys.push_back(std::move(s.key));
    return keys;
}

Selection criterion_all_nba(const RatingTable& table, RatingKind kind,
                            const ValidationInputs& inputs, const CriterionAllNbaOptions& options)
{
    if (inputs.all_nba.empty())
        throw InputError("criterion 1 needs the all-NBA list");
    std::map<std::string, double> combined;
    for (const auto& s : side_values(table, kind, Side::offense))
        combined[s.key] = s.value;
    if (!options.offense_only) {
        const double orient = higher_is_better(kind, Side::defense, table.sign) ? 1.0 : -1.0;
        std::map<std::string, double> both;
        for (const auto& s : side_values(table, kind, Side::defense)) {
            auto it = combined.find(s.key);
            if (it != combined.end())
                both[s.key] = it->second + orient * s.value;
        }
        combined = std::move(both);
    }
    std::vector<std::string> missing;
    std::map<char, std::vector<Scored>> by_position;
    for (const auto& [key, value] : combined) {
        auto it = inputs.positions.find(key);
        if (it == inputs.positions.end())
            missing.push_back(key);
        else
            by_position[it->second].push_back({key, value});
    }
    if (!missing.empty()) {
        std::string list;
        for (std::size_t i = 0; i < missing.size() && i < 20; ++i)
            list += (i ? ", " : "") + missing[i];
        if (missing.size() > 20)
            list += fmt::format(", ... ({} total)", missing.size());
        throw InputError("criterion 1: no position for " + list);
    }
    const std::unordered_set<std::string> nba(inputs.all_nba.begin(), inputs.all_nba.end());
    std::size_t hits = 0;
    for (auto [pos, n] : {std::pair{'G', options.guards}, std::pair{'F', options.forwards},
                          std::pair{'C', options.centers}}) {
        auto& v = by_position[pos];
        order_best_first(v, true);
        for (std::size_t i = 0; i < std::min(n, v.size()); ++i)
            hits += nba.contains(v[i].key);
    }
    return share(hits, inputs.all_nba.size());
}

Selection criterion_low_time(const RatingTable& table, RatingKind kind,
                             const ValidationInputs& inputs, std::size_t top_n,
                             std::size_t bottom_minutes_n)
{
    std::set<std::string> rated;
    for (const auto& r : table.rows)
        if (r.value(kind))
            rated.insert(r.player);
    std::vector<Scored> mins;
    std::vector<std::string> missing;
    for (const auto& key : rated) {
        auto it = inputs.minutes.find(key);
        if (it == inputs.minutes.end())
            missing.push_back(key);
        else
            mins.push_back({key, it->second});
    }
    if (!missing.empty())
        throw InputError(fmt::format("criterion 2: no minutes for {} rated player(s), e.g. '{}'",
                                     missing.size(), missing.front()));
    order_best_first(mins, false);
    std::unordered_set<std::string> low;
    for (std::size_t i = 0; i < std::min(bottom_minutes_n, mins.size()); ++i)
        low.insert(mins[i].key);

    std::size_t hits = 0, size = 0;
    for (Side side : {Side::offense, Side::defense}) {
        for (const auto& key : take(ranked_players(table, kind, side), top_n, false)) {
            ++size;
            hits += low.contains(key);
        }
    }
    return share(hits, size);
}

StarterShares criterion_starters(const RatingTable& table, RatingKind kind,
                                 const ValidationInputs& inputs, std::size_t n)
{
    if (inputs.minutes.empty())
        throw InputError("criterion 3 needs minutes per player");
    StarterShares out;
    for (bool bottom : {false, true}) {
        std::size_t hits = 0, size = 0;
        for (Side side : {Side::offense, Side::defense}) {
            for (const auto& key : take(ranked_players(table, kind, side), n, bottom)) {
                ++size;
                hits += inputs.starters.contains(key);
            }
        }
        (bottom ? out.bottom : out.top) = share(hits, size);
    }
    return out;
}

std::map<std::string, Selection> criterion_box_score(const RatingTable& table, RatingKind kind,
                                                     const ValidationInputs& inputs,
                                                     std::size_t top_n,
                                                     std::vector<std::string>* warnings)
{
    std::map<std::string, Selection> out;
    for (std::size_t s = 0; s < kBoxStatCount; ++s) {
        const Side side = s == kPts || s == kAst || s == kOreb ? Side::offense : Side::defense;
        const auto ranked = ranked_players(table, kind, side);
        std::vector<Scored> stat;
        for (const auto& key : ranked) {
            auto it = inputs.box_stats.find(key);
            if (it != inputs.box_stats.end() && it->second[s])
                stat.push_back({key, *it->second[s]});
        }
        if (stat.empty()) {
            if (warnings)
                warnings->push_back(fmt::format("criterion 4: no {} values; skipped", kBoxStatNames[s]));
            continue;
        }
        order_best_first(stat, true);
        std::unordered_set<std::string> best;
        for (std::size_t i = 0; i < std::min(top_n, stat.size()); ++i)
            best.insert(stat[i].key);
        const auto top = take(ranked, top_n, false);
        std::size_t hits = 0;
        for (const auto& key : top)
            hits += best.contains(key);
        out[kBoxStatNames[s]] = share(hits, top.size());
    }
    return out;
}

} // namespace rapm
