#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "rapm/design.hpp"
#include "rapm/errors.hpp"
#include "rapm/io.hpp"
#include "rapm/ratings.hpp"
#include "rapm/synth.hpp"

namespace rapm {

void SynthConfig::validate() const
{
    if (n_teams < 2)
        throw ConfigError("synthetic league needs at least 2 teams");
    if (players_per_team < 5)
        throw ConfigError("synthetic rosters need at least 5 players");
    if (2 * n_teams * players_per_team < 10)
        throw ConfigError("synthetic league needs at least 10 players");
    if (n_possessions == 0)
        throw ConfigError("synthetic league needs at least one possession");
    for (double s : {sparsity, defense_sparsity, ltp_fraction})
        if (!(s >= 0.0 && s <= 1.0))
            throw ConfigError("sparsity and LTP fractions must lie in [0, 1]");
    if (!(coef_min >= 0.0 && coef_max >= coef_min))
        throw ConfigError("need 0 <= coef_min <= coef_max");
    for (double p : baseline)
        if (!(p > 0.0))
            throw ConfigError("baseline marginals must be positive");
    if (possessions_per_game < 2 || stint_length == 0)
        throw ConfigError("games need at least 2 possessions and stints at least 1");
}

namespace {

constexpr double kStarterWeight = 1.0;
constexpr double kBenchWeight = 0.35;
constexpr double kLowTimeWeight = 0.02;
constexpr double kFourPointShare = 0.01;
constexpr double kMinutesPerPossession = 0.24;

char roster_position(int slot)
{
    static constexpr char kStarters[] = {'G', 'G', 'F', 'F', 'C'};
    static constexpr char kBench[] = {'G', 'F', 'C', 'G', 'F'};
    return slot < 5 ? kStarters[slot] : kBench[(slot - 5) % 5];
}

// Five distinct roster slots drawn without replacement with the given weights.
std::array<int, 5> draw_lineup(const std::vector<double>& weights, std::mt19937_64& rng)
{
    std::vector<double> w = weights;
    std::array<int, 5> out{};
    for (int k = 0; k < 5; ++k) {
        std::discrete_distribution<int> pick(w.begin(), w.end());
        out[static_cast<std::size_t>(k)] = pick(rng);
        w[static_cast<std::size_t>(out[static_cast<std::size_t>(k)])] = 0.0;
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

SynthData generate_synthetic(const SynthConfig& cfg)
{
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    SynthData out;
    for (std::size_t l = 0; l < 3; ++l)
        out.intercepts[l] = std::log(cfg.baseline[l + 1] / cfg.baseline[0]);

    const int per_team = cfg.players_per_team;
    const int n_ltp = std::min(per_team - 5, static_cast<int>(std::lround(cfg.ltp_fraction * per_team)));
    std::vector<std::vector<double>> weights(static_cast<std::size_t>(cfg.n_teams));
    for (int t = 0; t < cfg.n_teams; ++t) {
        const std::string team = fmt::format("T{:02}", t + 1);
        for (int s = 0; s < per_team; ++s) {
            SynthPlayer p;
            p.team = team;
            p.key = fmt::format("{} P{:02}", team, s + 1);
            p.position = roster_position(s);
            p.ltp = s >= per_team - n_ltp;
            out.players.push_back(std::move(p));
            weights[static_cast<std::size_t>(t)].push_back(
                s < 5 ? kStarterWeight : (s >= per_team - n_ltp ? kLowTimeWeight : kBenchWeight));
        }
    }

    // sparse true effects: a fixed count of players per side, chosen uniformly
    const auto plant = [&](double share, bool offense) {
        std::vector<std::size_t> idx(out.players.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto count = static_cast<std::size_t>(std::lround(share * static_cast<double>(idx.size())));
        for (std::size_t k = 0; k < count; ++k) {
            auto& beta = offense ? out.players[idx[k]].beta_offense : out.players[idx[k]].beta_defense;
            for (std::size_t l = 0; l < 3; ++l) {
                if (!cfg.signal_components[l])
                    continue;
                const double mag = cfg.coef_min + (cfg.coef_max - cfg.coef_min) * unif(rng);
                beta[l] = unif(rng) < 0.5 ? -mag : mag;
            }
        }
    };
    plant(cfg.sparsity, true);
    plant(cfg.defense_sparsity, false);

    std::string csv = "home_off,pts,season_type,O1,O2,O3,O4,O5,D1,D2,D3,D4,D5\n";
    std::vector<double> points_on(out.players.size(), 0.0);
    std::vector<std::size_t> games(out.players.size(), 0);
    std::array<std::size_t, 5> pts_counts{};
    std::uniform_int_distribution<int> pick_team(0, cfg.n_teams - 1);

    std::size_t written = 0;
    while (written < cfg.n_possessions) {
        const int home = pick_team(rng);
        int away = pick_team(rng);
        while (away == home)
            away = pick_team(rng);
        const std::array<int, 2> teams = {home, away};
        std::array<std::vector<bool>, 2> played;
        for (std::size_t s = 0; s < 2; ++s)
            played[s].assign(static_cast<std::size_t>(per_team), false);
        std::array<std::array<int, 5>, 2> lineup{};
        const std::size_t game_len = std::min(cfg.possessions_per_game, cfg.n_possessions - written);
        for (std::size_t k = 0; k < game_len; ++k) {
            if (k % cfg.stint_length == 0)
                for (std::size_t s = 0; s < 2; ++s)
                    lineup[s] = draw_lineup(weights[static_cast<std::size_t>(teams[s])], rng);
            const std::size_t off = k % 2, def = 1 - off;
            const auto base_off = static_cast<std::size_t>(teams[off] * per_team);
            const auto base_def = static_cast<std::size_t>(teams[def] * per_team);
            std::array<double, 3> mu = out.intercepts;
            for (int slot : lineup[off])
                for (std::size_t l = 0; l < 3; ++l)
                    mu[l] += out.players[base_off + static_cast<std::size_t>(slot)].beta_offense[l];
            for (int slot : lineup[def])
                for (std::size_t l = 0; l < 3; ++l)
                    mu[l] -= out.players[base_def + static_cast<std::size_t>(slot)].beta_defense[l];
            const auto probs = category_probs(mu[0], mu[1], mu[2]);
            const double u = unif(rng);
            int cat = u < probs[0] ? 0 : u < probs[0] + probs[1] ? 1 : u < probs[0] + probs[1] + probs[2] ? 2 : 3;
            int pts = cat;
            if (cat == 3 && unif(rng) < kFourPointShare)
                pts = 4;
            ++pts_counts[static_cast<std::size_t>(pts)];

            csv += fmt::format("{},{},regular", off == 0 ? 1 : 0, pts);
            for (int slot : lineup[off]) {
                const auto i = base_off + static_cast<std::size_t>(slot);
                csv += ',' + out.players[i].key;
                ++out.players[i].n_offense;
                points_on[i] += pts;
                played[off][static_cast<std::size_t>(slot)] = true;
            }
            for (int slot : lineup[def]) {
                const auto i = base_def + static_cast<std::size_t>(slot);
                csv += ',' + out.players[i].key;
                ++out.players[i].n_defense;
                played[def][static_cast<std::size_t>(slot)] = true;
            }
            csv += '\n';
        }
        written += game_len;
        for (std::size_t s = 0; s < 2; ++s)
            for (int slot = 0; slot < per_team; ++slot)
                if (played[s][static_cast<std::size_t>(slot)])
                    ++games[static_cast<std::size_t>(teams[s] * per_team + slot)];
    }
    out.possessions_csv = std::move(csv);

    // c3 as the ingest side computes it from the corpus
    std::vector<int> top;
    for (int p = 3; p <= 4; ++p)
        top.insert(top.end(), pts_counts[static_cast<std::size_t>(p)], p);
    out.c3 = top_category_points(top);
    MultinomialFit truth;
    truth.c3 = out.c3;
    for (std::size_t l = 0; l < 3; ++l) {
        FitResult f;
        f.family = Family::binomial;
        f.intercept = out.intercepts[l];
        truth.components[l] = f;
    }
    out.epts0 = epts_reference(truth);
    for (auto& p : out.players) {
        p.epts_offense = epts_from_effects(truth, p.beta_offense, Side::offense, SignConvention::model);
        p.epts_defense = epts_from_effects(truth, p.beta_defense, Side::defense, SignConvention::model);
        p.minutes = kMinutesPerPossession * static_cast<double>(p.n_offense + p.n_defense);
    }

    // box score: per-game team points while on court scaled to one player's share,
    // other stats from fixed per-minute rates with player-level noise
    std::string box = "player,team,minutes,position,pts_pg,ast_pg,oreb_pg,dreb_pg,stl_pg,blk_pg\n";
    std::normal_distribution<double> noise(1.0, 0.25);
    static constexpr std::array<double, 5> kRates = {0.08, 0.04, 0.12, 0.03, 0.02};
    for (std::size_t i = 0; i < out.players.size(); ++i) {
        const auto& p = out.players[i];
        const double g = std::max<double>(1.0, static_cast<double>(games[i]));
        box += fmt::format("{},{},{},{},{}", p.key, p.team, io::format_double(p.minutes),
                           std::string(1, p.position), io::format_double(0.2 * points_on[i] / g));
        for (double rate : kRates)
            box += ',' + io::format_double(std::max(0.0, rate * noise(rng)) * p.minutes / g);
        box += '\n';
    }
    out.box_score_csv = std::move(box);

    // all-NBA: best true combined EPTS per position among full-time players
    std::vector<std::size_t> order(out.players.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& pa = out.players[a];
        const auto& pb = out.players[b];
        return pa.epts_offense - pa.epts_defense > pb.epts_offense - pb.epts_defense;
    });
    std::map<char, int> quota = {{'G', 6}, {'F', 6}, {'C', 3}};
    for (std::size_t i : order) {
        const auto& p = out.players[i];
        if (p.ltp || quota[p.position] == 0)
            continue;
        --quota[p.position];
        out.all_nba += p.key + '\n';
    }

    nlohmann::json players = nlohmann::json::array();
    for (const auto& p : out.players)
        players.push_back({{"key", p.key},
                           {"team", p.team},
                           {"position", std::string(1, p.position)},
                           {"ltp", p.ltp},
                           {"beta_offense", p.beta_offense},
                           {"beta_defense", p.beta_defense},
                           {"epts_offense", p.epts_offense},
                           {"epts_defense", p.epts_defense},
                           {"n_offense", p.n_offense},
                           {"n_defense", p.n_defense},
                           {"minutes", p.minutes}});
    out.ledger = {{"config",
                   {{"n_teams", cfg.n_teams},
                    {"players_per_team", cfg.players_per_team},
                    {"n_possessions", cfg.n_possessions},
                    {"sparsity", cfg.sparsity},
                    {"defense_sparsity", cfg.defense_sparsity},
                    {"coef_min", cfg.coef_min},
                    {"coef_max", cfg.coef_max},
                    {"ltp_fraction", cfg.ltp_fraction},
                    {"signal_components", cfg.signal_components},
                    {"baseline", cfg.baseline},
                    {"seed", cfg.seed}}},
                  {"intercepts", out.intercepts},
                  {"c3", out.c3},
                  {"epts0", out.epts0},
                  {"pts_counts", pts_counts},
                  {"players", std::move(players)}};
    return out;
}

} // namespace rapm
