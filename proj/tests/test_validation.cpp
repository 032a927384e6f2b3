#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "rapm/errors.hpp"
#include "rapm/validation.hpp"

using namespace rapm;

namespace {

RatingRow row(const std::string& player, Side side, double rapm)
{
    RatingRow r;
    r.player = player;
    r.team = "AAA";
    r.side = side;
    r.rapm = rapm;
    return r;
}

RatingTable table_of(const std::vector<std::pair<std::string, double>>& offense,
                     const std::vector<std::pair<std::string, double>>& defense)
{
    RatingTable t;
    for (const auto& [p, v] : offense)
        t.rows.push_back(row(p, Side::offense, v));
    for (const auto& [p, v] : defense)
        t.rows.push_back(row(p, Side::defense, v));
    t.assign_ranks();
    return t;
}

// Six players: P1..P6 with 10..60 minutes.
RatingTable six_player_table()
{
    return table_of({{"P1", 5}, {"P2", 3}, {"P3", 4}, {"P4", 2}, {"P5", 1}, {"P6", 0}},
                    {{"P1", 2}, {"P2", 3}, {"P3", 1}, {"P4", 0}, {"P5", -1}, {"P6", 10}});
}

ValidationInputs six_player_inputs()
{
    ValidationInputs in;
    for (int i = 1; i <= 6; ++i)
        in.minutes["P" + std::to_string(i)] = 10.0 * i;
    in.starters = {"P4", "P5", "P6"};
    return in;
}

std::vector<std::array<double, 4>> random_probs(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<std::array<double, 4>> p(n);
    for (auto& r : p) {
        double s = 0;
        for (double& v : r)
            s += (v = u(rng));
        for (double& v : r)
            v /= s;
    }
    return p;
}

std::vector<int> draw_points(const std::vector<std::array<double, 4>>& probs, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<int> pts;
    for (const auto& p : probs) {
        std::discrete_distribution<int> d(p.begin(), p.end());
        pts.push_back(d(rng));
    }
    return pts;
}

} // namespace

TEST_CASE("position codes")
{
    CHECK(position_code("G") == 'G');
    CHECK(position_code(" f-c ") == 'F');
    CHECK(position_code("Center") == 'C');
    CHECK(position_code("PG") == 'G');
    CHECK(position_code("SG") == 'G');
    CHECK(position_code("SF") == 'F');
    CHECK(position_code("PF") == 'F');
    CHECK_FALSE(position_code(""));
    CHECK_FALSE(position_code("X"));
}

TEST_CASE("starters are the six most-played per team with ties by key")
{
    std::map<std::string, double> minutes;
    std::map<std::string, std::string> teams;
    for (int i = 0; i < 8; ++i) {
        const std::string key = "AAA P" + std::to_string(i);
        minutes[key] = 100.0 - i;
        teams[key] = "AAA";
    }
    // P5 and P9 tie for sixth place
    minutes["AAA P9"] = 95.0;
    teams["AAA P9"] = "AAA";
    minutes["BBB Q1"] = 1.0;
    minutes["BBB Q2"] = 2.0;

    const auto s = derive_starters(minutes, teams);
    const std::set<std::string> expect = {"AAA P0", "AAA P1", "AAA P2", "AAA P3", "AAA P4",
                                          "AAA P5", "BBB Q1", "BBB Q2"};
    CHECK(s == expect);
}

TEST_CASE("all-NBA list parsing")
{
    std::string text = "# header\n\n";
    for (int i = 0; i < 15; ++i)
        text += "  AAA P" + std::to_string(i) + "  \n";
    std::istringstream in(text);
    const auto keys = read_all_nba(in);
    REQUIRE(keys.size() == 15);
    CHECK(keys.front() == "AAA P0");
    CHECK(keys.back() == "AAA P14");

    std::istringstream short_list("A\nB\n");
    CHECK_THROWS_AS(read_all_nba(short_list), InputError);
    CHECK_THROWS_AS(read_all_nba(std::filesystem::path("/nonexistent/all_nba.txt")), InputError);
}

TEST_CASE("validation inputs from box-score rows")
{
    std::vector<BoxScoreRow> box(3);
    box[0].player = "AAA A";
    box[0].team = "AAA";
    box[0].minutes = 30;
    box[0].position = "C";
    box[1].player = "AAA B";
    box[1].team = "AAA";
    box[1].minutes = 20;
    box[1].position = "";
    box[2] = box[0];
    box[2].minutes = 99;

    const auto in = make_validation_inputs(box);
    CHECK(in.minutes.at("AAA A") == 30.0);
    CHECK(in.positions.at("AAA A") == 'C');
    CHECK_FALSE(in.positions.contains("AAA B"));
    CHECK(in.teams.at("AAA B") == "AAA");
    CHECK(in.starters.size() == 2);
    REQUIRE(in.warnings.size() == 1);
    CHECK(in.warnings[0].find("duplicate") != std::string::npos);
}

TEST_CASE("ranking orientation follows rating kind and sign convention")
{
    RatingTable t;
    for (auto [p, v] : {std::pair{"A", 1.0}, std::pair{"B", 2.0}, std::pair{"C", 2.0}}) {
        RatingRow r;
        r.player = p;
        r.side = Side::defense;
        r.epts = v;
        r.rapm = v;
        t.rows.push_back(r);
    }
    t.sign = SignConvention::model;
    CHECK(ranked_players(t, RatingKind::epts, Side::defense) == std::vector<std::string>{"A", "B", "C"});
    CHECK(ranked_players(t, RatingKind::rapm, Side::defense) == std::vector<std::string>{"B", "C", "A"});
    t.sign = SignConvention::paper;
    CHECK(ranked_players(t, RatingKind::epts, Side::defense) == std::vector<std::string>{"B", "C", "A"});
    CHECK(ranked_players(t, RatingKind::wepts, Side::defense).empty());
}

TEST_CASE("criterion 1 on a hand-built table")
{
    const auto t = table_of(
        {{"G1", 3}, {"G2", 2}, {"G3", 1}, {"G4", 0}, {"F1", 1}, {"F2", 2}, {"F3", 3}, {"C1", 1}, {"C2", 0}},
        {{"G1", -5}, {"G2", 0}, {"G3", 0}, {"G4", 0}, {"F1", 0}, {"F2", 0}, {"F3", 0}, {"C1", 0}, {"C2", 2}});
    ValidationInputs in;
    for (const char* g : {"G1", "G2", "G3", "G4"})
        in.positions[g] = 'G';
    for (const char* f : {"F1", "F2", "F3"})
        in.positions[f] = 'F';
    for (const char* c : {"C1", "C2"})
        in.positions[c] = 'C';
    in.all_nba = {"G1", "G3", "F2", "C2"};
    for (int i = 0; i < 11; ++i)
        in.all_nba.push_back("X" + std::to_string(i));

    CriterionAllNbaOptions opt;
    opt.guards = 2;
    opt.forwards = 2;
    opt.centers = 1;
    // combined: guards G2, G3; forwards F3, F2; center C2
    const auto both = criterion_all_nba(t, RatingKind::rapm, in, opt);
    CHECK(both.hits == 3);
    CHECK(both.size == 15);
    CHECK(both.pct == doctest::Approx(20.0));

    // offense only: guards G1, G2; forwards F3, F2; center C1
    opt.offense_only = true;
    const auto off = criterion_all_nba(t, RatingKind::rapm, in, opt);
    CHECK(off.hits == 2);
    CHECK(off.pct == doctest::Approx(100.0 * 2 / 15));

    in.positions.erase("C1");
    CHECK_THROWS_AS(criterion_all_nba(t, RatingKind::rapm, in, opt), InputError);
    in.all_nba.clear();
    CHECK_THROWS_AS(criterion_all_nba(t, RatingKind::rapm, in, opt), InputError);
}

TEST_CASE("criteria 2 and 3 on a hand-built table")
{
    auto t = six_player_table();
    // rated only by epts, so not part of the rapm minute ranking
    RatingRow extra;
    extra.player = "P7";
    extra.side = Side::offense;
    extra.epts = 1.0;
    t.rows.push_back(extra);
    auto in = six_player_inputs();
    in.minutes["P7"] = 1.0;

    // bottom minutes: P1, P2; offense top 2: P1, P3; defense top 2: P6, P2
    const auto c2 = criterion_low_time(t, RatingKind::rapm, in, 2, 2);
    CHECK(c2.hits == 2);
    CHECK(c2.size == 4);
    CHECK(c2.pct == doctest::Approx(50.0));

    // starters P4..P6; offense bottom P5, P6; defense bottom P4, P5
    const auto c3 = criterion_starters(t, RatingKind::rapm, in, 2);
    CHECK(c3.top.hits == 1);
    CHECK(c3.top.pct == doctest::Approx(25.0));
    CHECK(c3.bottom.hits == 4);
    CHECK(c3.bottom.pct == doctest::Approx(100.0));

    in.minutes.erase("P3");
    CHECK_THROWS_AS(criterion_low_time(t, RatingKind::rapm, in, 2, 2), InputError);
    in.minutes.clear();
    CHECK_THROWS_AS(criterion_starters(t, RatingKind::rapm, in, 2), InputError);
}

TEST_CASE("criterion 4 skips absent statistics with a warning")
{
    const auto t = six_player_table();
    auto in = six_player_inputs();
    const double pts[] = {10, 30, 20, 5, 4, 3};
    for (int i = 1; i <= 6; ++i)
        in.box_stats["P" + std::to_string(i)][kPts] = pts[i - 1];
    in.box_stats["P6"][kDreb] = 1;
    in.box_stats["P2"][kDreb] = 9;
    in.box_stats["P4"][kDreb] = 8;

    std::vector<std::string> warnings;
    const auto c4 = criterion_box_score(t, RatingKind::rapm, in, 2, &warnings);
    REQUIRE(c4.size() == 2);
    // by pts: P2, P3; offense top: P1, P3
    CHECK(c4.at(kBoxStatNames[kPts]).hits == 1);
    CHECK(c4.at(kBoxStatNames[kPts]).pct == doctest::Approx(50.0));
    // by dreb: P2, P4; defense top: P6, P2
    CHECK(c4.at(kBoxStatNames[kDreb]).hits == 1);
    CHECK(warnings.size() == 4);
    CHECK(warnings[0] == fmt::format("criterion 4: no {} values; skipped", kBoxStatNames[kAst]));
}

TEST_CASE("validation report runs what the inputs allow")
{
    const auto t = six_player_table();
    auto in = six_player_inputs();
    in.box_stats["P1"][kPts] = 1;

    ValidationOptions opt;
    opt.top_n = 2;
    opt.bottom_minutes_n = 2;
    const auto r = validate_ratings(t, RatingKind::rapm, "ridge rapm", in, opt);
    CHECK_FALSE(r.criterion1);
    REQUIRE(r.criterion2);
    CHECK(r.criterion2->pct == doctest::Approx(50.0));
    REQUIRE(r.criterion3);
    CHECK(r.criterion4.contains(kBoxStatNames[kPts]));
    CHECK(r.warnings.front() == "criterion 1 skipped: no all-NBA list");
    CHECK_THROWS_AS(validate_ratings(t, RatingKind::epts, "x", in, opt), InputError);

    const auto j = report_to_json({r});
    const auto& jr = j.at("reports").at(0);
    CHECK(jr.at("label") == "ridge rapm");
    CHECK(jr.at("rating") == "rapm");
    CHECK(jr.at("criterion1").is_null());
    CHECK(jr.at("criterion2").at("hits") == 2);
    CHECK(jr.at("criterion3b").at("pct").get<double>() == doctest::Approx(100.0));
    CHECK(jr.at("criterion4").at(kBoxStatNames[kPts]).at("size") == 2);

    const auto text = report_to_text({r});
    std::istringstream lines(text);
    std::string header, first;
    std::getline(lines, header);
    std::getline(lines, first);
    CHECK(header.starts_with("method"));
    CHECK(header.find("C3b") != std::string::npos);
    CHECK(first.starts_with("ridge rapm"));
    CHECK(first.find("50.0") != std::string::npos);
    CHECK(first.find(" -") != std::string::npos);
}

TEST_CASE("goodness of fit is reproducible and matches its expectations")
{
    const auto probs = random_probs(400, 3);
    const auto pts = draw_points(probs, 4);
    const auto a = goodness_of_fit(probs, pts, 500, 11);
    const auto b = goodness_of_fit(probs, pts, 500, 11);
    const auto c = goodness_of_fit(probs, pts, 500, 12);
    CHECK(a.p_value == b.p_value);
    CHECK(a.simulated_chi2 == b.simulated_chi2);
    CHECK(a.simulated_chi2 != c.simulated_chi2);
    CHECK(a.n_sims == 500);
    CHECK(a.seed == 11);

    std::array<double, 4> obs{};
    for (int p : pts)
        obs[static_cast<std::size_t>(p)] += 1;
    CHECK(a.observed == obs);

    // mean simulated count is within a few standard errors of the summed probabilities
    for (std::size_t k = 0; k < 4; ++k) {
        double mean = 0, var = 0;
        for (const auto& p : probs) {
            mean += p[k];
            var += p[k] * (1 - p[k]);
        }
        CHECK(std::abs(a.expected[k] - mean) < 5 * std::sqrt(var / 500));
    }
    for (const auto& f : a.simulated_freqs)
        CHECK(f[0] + f[1] + f[2] + f[3] == doctest::Approx(1.0));

    const auto j = gof_to_json(a);
    CHECK(j.at("p_value").get<double>() == a.p_value);
    CHECK(j.at("categories").size() == 4);
    CHECK(j.at("n_sims") == 500);

    CHECK_THROWS_AS(goodness_of_fit(probs, std::vector<int>(3), 10, 1), InputError);
    CHECK_THROWS_AS(goodness_of_fit(probs, pts, 0, 1), ConfigError);
}

TEST_CASE("goodness of fit on degenerate probabilities")
{
    const std::vector<std::array<double, 4>> probs(50, {1.0, 0.0, 0.0, 0.0});
    std::vector<int> pts(50, 0);
    const auto fit = goodness_of_fit(probs, pts, 20, 1);
    CHECK(fit.chi2_observed == 0.0);
    CHECK(fit.p_value == 1.0);
    CHECK(fit.expected[0] == 50.0);

    pts[7] = 4;
    const auto off = goodness_of_fit(probs, pts, 20, 1);
    CHECK(off.observed[3] == 1.0);
    CHECK(std::isinf(off.chi2_observed));
    CHECK(off.p_value == 0.0);
    CHECK(gof_to_json(off).at("chi2_observed") == "inf");
}

TEST_CASE("goodness-of-fit p-values are uniform under the model")
{
    constexpr int reps = 200;
    int inside = 0;
    double mean_p = 0;
    for (int r = 0; r < reps; ++r) {
        const auto probs = random_probs(300, 100 + r);
        const auto pts = draw_points(probs, 5000 + r);
        const double p = goodness_of_fit(probs, pts, 200, 9000 + 1000 * r).p_value;
        inside += p >= 0.05 && p <= 0.95;
        mean_p += p / reps;
    }
    // 0.9 and 0.5 under uniformity; bounds are about 3.3 standard errors
    const double frac = static_cast<double>(inside) / reps;
    CHECK(frac >= 0.83);
    CHECK(frac <= 0.97);
    CHECK(mean_p >= 0.43);
    CHECK(mean_p <= 0.57);
}

TEST_CASE("model rmse")
{
    const std::vector<double> pred = {1.0, 2.0};
    const std::vector<int> obs = {0, 4};
    CHECK(model_rmse(pred, obs) == doctest::Approx(std::sqrt(2.5)));
    CHECK(model_rmse(std::vector<double>{}, std::vector<int>{}) == 0.0);
    CHECK_THROWS_AS(model_rmse(pred, std::vector<int>{1}), InputError);
}
