#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "rapm/errors.hpp"
#include "rapm/possession.hpp"
#include "rapm/registry.hpp"
#include "rapm/synth.hpp"

using namespace rapm;

namespace {

SynthConfig small_config()
{
    SynthConfig cfg;
    cfg.n_teams = 6;
    cfg.players_per_team = 13;
    cfg.n_possessions = 6000;
    cfg.seed = 17;
    return cfg;
}

} // namespace

TEST_CASE("synthetic league is reproducible by seed")
{
    auto cfg = small_config();
    const auto a = generate_synthetic(cfg);
    const auto b = generate_synthetic(cfg);
    CHECK(a.possessions_csv == b.possessions_csv);
    CHECK(a.box_score_csv == b.box_score_csv);
    CHECK(a.ledger == b.ledger);
    cfg.seed = 18;
    CHECK(generate_synthetic(cfg).possessions_csv != a.possessions_csv);
}

TEST_CASE("ledger agrees with the generated possessions")
{
    const auto cfg = small_config();
    const auto data = generate_synthetic(cfg);
    std::istringstream in(data.possessions_csv);
    const auto log = parse_possessions(in);
    CHECK(log.errors.empty());
    REQUIRE(log.rows.size() == cfg.n_possessions);

    const auto registry = build_registry(log);
    const auto& players = data.ledger.at("players");
    REQUIRE(players.size() == 6 * 13);
    for (const auto& p : players) {
        const auto key = p.at("key").get<std::string>();
        const std::size_t n_off = p.at("n_offense"), n_def = p.at("n_defense");
        if (n_off + n_def == 0)
            continue;
        CHECK(registry.at(key).n_offense == n_off);
        CHECK(registry.at(key).n_defense == n_def);
    }

    std::vector<std::size_t> counts(5, 0);
    for (const auto& r : log.rows)
        ++counts[static_cast<std::size_t>(r.points)];
    CHECK(data.ledger.at("pts_counts").get<std::vector<std::size_t>>() == counts);

    const double top = counts[4] ? (3.0 * counts[3] + 4.0 * counts[4]) / (counts[3] + counts[4]) : 3.0;
    CHECK(data.c3 == doctest::Approx(top));

    // all-reference lineup: intercepts are log-odds of the baseline against zero points
    const auto& base = cfg.baseline;
    for (std::size_t l = 0; l < 3; ++l)
        CHECK(data.intercepts[l] == doctest::Approx(std::log(base[l + 1] / base[0])));
    CHECK(data.epts0 == doctest::Approx(base[1] + 2 * base[2] + data.c3 * base[3]));
}

TEST_CASE("without effects the category frequencies match the baseline")
{
    auto cfg = small_config();
    cfg.sparsity = 0.0;
    cfg.n_possessions = 60000;
    const auto data = generate_synthetic(cfg);
    const auto counts = data.ledger.at("pts_counts").get<std::vector<double>>();
    const double n = static_cast<double>(cfg.n_possessions);
    const std::array<double, 4> observed = {counts[0], counts[1], counts[2], counts[3] + counts[4]};
    for (std::size_t c = 0; c < 4; ++c) {
        const double p = cfg.baseline[c];
        CHECK(std::abs(observed[c] / n - p) < 4.5 * std::sqrt(p * (1 - p) / n));
    }
    for (const auto& p : data.players) {
        CHECK(p.epts_offense == doctest::Approx(data.epts0));
        CHECK(p.epts_defense == doctest::Approx(data.epts0));
    }
}

TEST_CASE("planted effects and low-time players")
{
    const auto cfg = small_config();
    const auto data = generate_synthetic(cfg);

    std::size_t with_effect = 0;
    std::map<std::string, std::size_t> ltp_per_team;
    for (const auto& p : data.players) {
        const bool nonzero = p.beta_offense != std::array<double, 3>{};
        with_effect += nonzero;
        for (std::size_t l = 0; l < 3; ++l) {
            if (!cfg.signal_components[l])
                CHECK(p.beta_offense[l] == 0.0);
            else if (nonzero)
                CHECK((std::abs(p.beta_offense[l]) >= cfg.coef_min &&
                       std::abs(p.beta_offense[l]) <= cfg.coef_max));
        }
        CHECK(p.beta_defense == std::array<double, 3>{});
        ltp_per_team[p.team] += p.ltp;
    }
    CHECK(with_effect == static_cast<std::size_t>(std::lround(cfg.sparsity * data.players.size())));
    for (const auto& [team, n] : ltp_per_team)
        CHECK(n == static_cast<std::size_t>(std::lround(cfg.ltp_fraction * cfg.players_per_team)));

    // low-time players play far less than any starter of their team
    std::map<std::string, double> least_starter;
    for (std::size_t i = 0; i < data.players.size(); ++i) {
        const auto& p = data.players[i];
        if (i % cfg.players_per_team < 5)
            least_starter[p.team] = least_starter.contains(p.team)
                                        ? std::min(least_starter[p.team], p.minutes)
                                        : p.minutes;
    }
    for (const auto& p : data.players)
        if (p.ltp)
            CHECK(p.minutes < 0.2 * least_starter.at(p.team));
}

TEST_CASE("all-NBA list and box score")
{
    const auto data = generate_synthetic(small_config());
    std::map<std::string, const SynthPlayer*> by_key;
    for (const auto& p : data.players)
        by_key[p.key] = &p;

    std::istringstream list(data.all_nba);
    std::map<char, int> per_position;
    std::string key;
    int n = 0;
    while (std::getline(list, key)) {
        const auto* p = by_key.at(key);
        CHECK_FALSE(p->ltp);
        ++per_position[p->position];
        ++n;
    }
    CHECK(n == 15);
    CHECK(per_position['G'] == 6);
    CHECK(per_position['F'] == 6);
    CHECK(per_position['C'] == 3);

    std::istringstream box(data.box_score_csv);
    const auto rows = parse_box_score(box);
    REQUIRE(rows.size() == data.players.size());
    for (const auto& r : rows) {
        CHECK(r.minutes == doctest::Approx(by_key.at(r.player)->minutes));
        for (const auto& s : r.stats)
            CHECK((s && *s >= 0.0));
    }
}

TEST_CASE("synthetic configuration is validated")
{
    auto cfg = small_config();
    cfg.players_per_team = 4;
    CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
    cfg = small_config();
    cfg.sparsity = 1.5;
    CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
    cfg = small_config();
    cfg.coef_max = 0.1;
    CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
}
