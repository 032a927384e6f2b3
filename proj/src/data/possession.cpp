#include "rapm/possession.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include <fmt/core.h>

#include "rapm/csv.hpp"
#include "rapm/errors.hpp"

namespace rapm {

PlayerId PossessionLog::intern_player(std::string_view key)
{
    auto [it, inserted] =
        player_index_.try_emplace(std::string(key), static_cast<PlayerId>(players_.size()));
    if (inserted)
        players_.emplace_back(key);
    return it->second;
}

TeamId PossessionLog::intern_team(std::string_view key)
{
    auto [it, inserted] =
        team_index_.try_emplace(std::string(key), static_cast<TeamId>(teams_.size()));
    if (inserted)
        teams_.emplace_back(key);
    return it->second;
}

std::string_view team_of(std::string_view player_key)
{
    auto pos = player_key.find(' ');
    return pos == std::string_view::npos ? player_key : player_key.substr(0, pos);
}

namespace {

bool parse_int(std::string_view s, int& out)
{
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

} // namespace

PossessionLog parse_possessions(std::istream& in)
{
    csv::Reader reader(in);
    std::vector<std::string> required(kPossessionColumns.begin(), kPossessionColumns.end());
    reader.require(required);

    std::array<std::size_t, 13> col{};
    for (std::size_t i = 0; i < col.size(); ++i)
        col[i] = *reader.column(kPossessionColumns[i]);
    const std::size_t width = *std::max_element(col.begin(), col.end()) + 1;

    PossessionLog log;
    std::vector<std::string> f;
    while (reader.next(f)) {
        const std::size_t line = reader.line_number();
        auto reject = [&](std::string msg) { log.errors.push_back({line, std::move(msg)}); };

        if (f.size() < width) {
            reject(fmt::format("expected at least {} fields, found {}", width, f.size()));
            continue;
        }
        int home = 0;
        if (!parse_int(f[col[0]], home) || (home != 0 && home != 1)) {
            reject(fmt::format("home_off must be 0 or 1, got '{}'", f[col[0]]));
            continue;
        }
        int pts = 0;
        if (!parse_int(f[col[1]], pts) || pts < 0 || pts > 6) {
            reject(fmt::format("pts must be an integer in 0..6, got '{}'", f[col[1]]));
            continue;
        }
        SeasonType season;
        const std::string& st = f[col[2]];
        if (st == "regular" || st == "Regular" || st == "0")
            season = SeasonType::regular;
        else if (st == "playoffs" || st == "playoff" || st == "Playoffs" || st == "1")
            season = SeasonType::playoff;
        else {
            reject(fmt::format("season_type must be 'regular' or 'playoffs', got '{}'", st));
            continue;
        }

        std::array<std::string_view, 10> keys;
        bool ok = true;
        for (std::size_t k = 0; k < 10 && ok; ++k) {
            keys[k] = f[col[3 + k]];
            if (keys[k].empty()) {
                reject(fmt::format("empty player field {}", kPossessionColumns[3 + k]));
                ok = false;
            }
        }
        if (!ok)
            continue;
        for (std::size_t a = 0; a < 10 && ok; ++a)
            for (std::size_t b = a + 1; b < 10 && ok; ++b)
                if (keys[a] == keys[b]) {
                    reject(fmt::format("duplicate player '{}' in row", keys[a]));
                    ok = false;
                }
        if (!ok)
            continue;

        const std::string_view off_team = team_of(keys[0]);
        const std::string_view def_team = team_of(keys[5]);
        for (std::size_t k = 0; k < 10 && ok; ++k) {
            const std::string_view expect = k < 5 ? off_team : def_team;
            if (team_of(keys[k]) != expect) {
                reject(fmt::format("player '{}' does not belong to {} team '{}'", keys[k],
                                   k < 5 ? "offense" : "defense", expect));
                ok = false;
            }
        }
        if (!ok)
            continue;
        if (off_team == def_team) {
            reject(fmt::format("offense and defense share team '{}'", off_team));
            continue;
        }

        Possession p;
        p.offense_is_home = home == 1;
        p.points = pts;
        p.season_type = season;
        p.offense_team = log.intern_team(off_team);
        p.defense_team = log.intern_team(def_team);
        for (std::size_t k = 0; k < 5; ++k) {
            p.offense[k] = log.intern_player(keys[k]);
            p.defense[k] = log.intern_player(keys[5 + k]);
        }
        log.rows.push_back(p);
    }
    return log;
}

PossessionLog parse_possessions(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open possessions file: " + path.string());
    return parse_possessions(in);
}

} // namespace rapm
