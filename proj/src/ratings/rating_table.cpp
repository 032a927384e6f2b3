#include <algorithm>
#include <charconv>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "rapm/csv.hpp"
#include "rapm/errors.hpp"
#include "rapm/io.hpp"
#include "rapm/ratings.hpp"

namespace rapm {

const char* to_string(RatingKind k)
{
    switch (k) {
    case RatingKind::rapm: return "rapm";
    case RatingKind::rapm_binomial: return "rapm_binomial";
    case RatingKind::epts: return "epts";
    case RatingKind::wepts: return "wepts";
    }
    return "?";
}

RatingKind rating_kind_from_string(const std::string& s)
{
    for (auto k : {RatingKind::rapm, RatingKind::rapm_binomial, RatingKind::epts, RatingKind::wepts})
        if (s == to_string(k))
            return k;
    throw ConfigError(fmt::format("unknown rating '{}' (expected rapm, rapm_binomial, epts, wepts)", s));
}

bool higher_is_better(RatingKind kind, Side side, SignConvention sign)
{
    if (side == Side::offense)
        return true;
    // RAPM defensive coefficients multiply -1 on court, so a larger one concedes less.
    if (kind == RatingKind::rapm || kind == RatingKind::rapm_binomial)
        return true;
    return sign == SignConvention::paper;
}

std::optional<double> RatingRow::value(RatingKind kind) const
{
    switch (kind) {
    case RatingKind::rapm: return rapm;
    case RatingKind::rapm_binomial: return rapm_binomial;
    case RatingKind::epts: return epts;
    case RatingKind::wepts: return wepts;
    }
    return std::nullopt;
}

bool RatingTable::has(RatingKind kind) const
{
    return std::any_of(rows.begin(), rows.end(),
                       [&](const RatingRow& r) { return r.value(kind).has_value(); });
}

void RatingTable::assign_ranks()
{
    for (Side side : {Side::offense, Side::defense}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].side != side)
                continue;
            if (rows[i].value(primary))
                idx.push_back(i);
            else
                rows[i].rank = 0;
        }
        const bool higher = higher_is_better(primary, side, sign);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            const double va = *rows[a].value(primary), vb = *rows[b].value(primary);
            return higher ? va > vb : va < vb;
        });
        for (std::size_t r = 0; r < idx.size(); ++r)
            rows[idx[r]].rank = r + 1;
    }
}

void scale_rapm(RatingTable& table, double factor)
{
    if (!(factor > 0.0))
        throw ConfigError(fmt::format("RAPM scale must be positive, got {}", factor));
    for (auto& r : table.rows) {
        if (r.rapm)
            *r.rapm *= factor;
        if (r.rapm_binomial)
            *r.rapm_binomial *= factor;
    }
    table.metadata["rapm_scale"] = factor;
}

RatingTable rapm_table(const FitResult* normal, const FitResult* binomial, const DesignMatrix& x,
                       const PlayerRegistry& registry)
{
    if (!normal && !binomial)
        throw InputError("rapm_table needs at least one fit");
    RatingTable t;
    t.primary = normal ? RatingKind::rapm : RatingKind::rapm_binomial;
    std::optional<RapmColumns> n, b;
    if (normal)
        n = extract_rapm(*normal, x, registry);
    if (binomial)
        b = extract_rapm(*binomial, x, registry);
    for (Side side : {Side::offense, Side::defense}) {
        for (std::size_t k = 0; k < registry.size(); ++k) {
            const PlayerRecord& p = registry[k];
            RatingRow row;
            row.player = p.key;
            row.team = p.team;
            row.side = side;
            if (n)
                row.rapm = side == Side::offense ? n->offense[k] : n->defense[k];
            if (b)
                row.rapm_binomial = side == Side::offense ? b->offense[k] : b->defense[k];
            row.weight = participation_weight(registry, p.key, side);
            row.is_reference = *row.value(t.primary) == 0.0;
            t.rows.push_back(std::move(row));
        }
    }
    t.metadata["rating"] = to_string(t.primary);
    if (normal)
        t.metadata["normal"] = {{"lambda", normal->lambda}, {"alpha", normal->alpha}};
    if (binomial)
        t.metadata["binomial"] = {{"lambda", binomial->lambda}, {"alpha", binomial->alpha}};
    t.assign_ranks();
    return t;
}

RatingTable multinomial_table(const MultinomialFit& fit, const PlayerRegistry& registry,
                              SignConvention sign)
{
    RatingTable t;
    t.primary = RatingKind::wepts;
    t.sign = sign;
    const double epts0 = epts_reference(fit);
    for (Side side : {Side::offense, Side::defense}) {
        for (const auto& p : registry.players()) {
            auto it = fit.players.find(p.key);
            if (it == fit.players.end())
                throw InputError(fmt::format("player '{}' is not part of the multinomial fit", p.key));
            const auto& effect = side == Side::offense ? it->second.offense : it->second.defense;
            RatingRow row;
            row.player = p.key;
            row.team = p.team;
            row.side = side;
            row.weight = participation_weight(registry, p.key, side);
            row.epts = epts_from_effects(fit, effect, side, sign);
            row.wepts = weighted_epts(row.weight, *row.epts, epts0);
            row.is_reference = std::all_of(effect.begin(), effect.end(),
                                           [](double v) { return v == 0.0; });
            t.rows.push_back(std::move(row));
        }
    }
    nlohmann::json lambdas = nlohmann::json::array();
    for (const auto& c : fit.components)
        lambdas.push_back(c ? nlohmann::json(c->lambda) : nlohmann::json(nullptr));
    t.metadata = {{"rating", "wepts"},
                  {"family", "multinomial"},
                  {"sign_convention", to_string(sign)},
                  {"c3", fit.c3},
                  {"epts0", epts0},
                  {"lambda", lambdas}};
    t.assign_ranks();
    return t;
}

RatingTable merge_traded(const RatingTable& table, const PlayerRegistry& registry)
{
    struct Acc {
        std::vector<std::string> keys;
        std::vector<std::string> teams;
        double total = 0.0;
        std::array<double, 5> sum{};  // rapm, rapm_binomial, epts, wepts, weight
        std::array<bool, 4> present{true, true, true, true};
        bool reference = true;
    };
    std::map<std::pair<int, std::string>, Acc> groups;
    for (const RatingRow& r : table.rows) {
        const PlayerRecord& p = registry.at(r.player);
        const std::string name = r.player.size() > p.team.size() + 1 &&
                                         r.player.compare(0, p.team.size() + 1, p.team + " ") == 0
                                     ? r.player.substr(p.team.size() + 1)
                                     : r.player;
        const double n = static_cast<double>(r.side == Side::offense ? p.n_offense : p.n_defense);
        Acc& a = groups[{static_cast<int>(r.side), name}];
        a.keys.push_back(r.player);
        a.teams.push_back(r.team);
        a.total += n;
        const std::array<std::optional<double>, 4> vals = {r.rapm, r.rapm_binomial, r.epts, r.wepts};
        for (std::size_t k = 0; k < 4; ++k) {
            if (vals[k])
                a.sum[k] += n * *vals[k];
            else
                a.present[k] = false;
        }
        a.sum[4] += n * r.weight;
        a.reference = a.reference && r.is_reference;
    }
    RatingTable out;
    out.primary = table.primary;
    out.sign = table.sign;
    out.metadata = table.metadata;
    out.metadata["merged_traded"] = true;
    for (auto& [key, a] : groups) {
        if (a.total <= 0.0)
            throw InputError(fmt::format("player '{}' has no possessions", key.second));
        RatingRow row;
        // players with one team keep their full key
        row.player = a.keys.size() == 1 ? a.keys.front() : key.second;
        std::sort(a.teams.begin(), a.teams.end());
        for (std::size_t i = 0; i < a.teams.size(); ++i)
            row.team += (i ? "/" : "") + a.teams[i];
        row.side = static_cast<Side>(key.first);
        std::array<std::optional<double>*, 4> dst = {&row.rapm, &row.rapm_binomial, &row.epts,
                                                     &row.wepts};
        for (std::size_t k = 0; k < 4; ++k)
            if (a.present[k])
                *dst[k] = a.sum[k] / a.total;
        row.weight = a.sum[4] / a.total;
        row.is_reference = a.reference;
        out.rows.push_back(std::move(row));
    }
    std::stable_sort(out.rows.begin(), out.rows.end(), [](const RatingRow& a, const RatingRow& b) {
        return std::pair(a.side, a.player) < std::pair(b.side, b.player);
    });
    out.assign_ranks();
    return out;
}

namespace {

constexpr const char* kHeader = "player,team,side,rapm,rapm_binomial,epts,wepts,weight,is_reference,rank";

std::string opt(const std::optional<double>& v) { return v ? io::format_double(*v) : std::string(); }

std::optional<double> parse_opt(const std::string& s, std::size_t line, const char* what)
{
    const auto t = csv::trim(s);
    if (t.empty())
        return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size())
        throw InputError(fmt::format("line {}: bad {} value '{}'", line, what, t));
    return v;
}

} // namespace

std::string rating_table_to_csv(const RatingTable& table)
{
    std::string out = kHeader;
    out += '\n';
    for (const RatingRow& r : table.rows) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", csv::escape(r.player),
                           csv::escape(r.team), to_string(r.side), opt(r.rapm),
                           opt(r.rapm_binomial), opt(r.epts), opt(r.wepts),
                           io::format_double(r.weight), r.is_reference ? 1 : 0, r.rank);
    }
    return out;
}

RatingTable rating_table_from_csv(std::istream& in)
{
    csv::Reader reader(in);
    const std::vector<std::string> cols = {"player", "team", "side", "rapm", "rapm_binomial",
                                           "epts", "wepts", "weight", "is_reference", "rank"};
    reader.require(cols);
    std::array<std::size_t, 10> at{};
    for (std::size_t k = 0; k < cols.size(); ++k)
        at[k] = *reader.column(cols[k]);
    RatingTable t;
    std::vector<std::string> f;
    while (reader.next(f)) {
        const std::size_t line = reader.line_number();
        if (f.size() != reader.header().size())
            throw InputError(fmt::format("line {}: expected {} fields, got {}", line,
                                         reader.header().size(), f.size()));
        RatingRow r;
        r.player = f[at[0]];
        r.team = f[at[1]];
        const auto side = csv::trim(f[at[2]]);
        if (side == "offense")
            r.side = Side::offense;
        else if (side == "defense")
            r.side = Side::defense;
        else
            throw InputError(fmt::format("line {}: side must be offense or defense", line));
        r.rapm = parse_opt(f[at[3]], line, "rapm");
        r.rapm_binomial = parse_opt(f[at[4]], line, "rapm_binomial");
        r.epts = parse_opt(f[at[5]], line, "epts");
        r.wepts = parse_opt(f[at[6]], line, "wepts");
        r.weight = parse_opt(f[at[7]], line, "weight").value_or(0.0);
        r.is_reference = csv::trim(f[at[8]]) == "1";
        r.rank = static_cast<std::size_t>(parse_opt(f[at[9]], line, "rank").value_or(0.0));
        t.rows.push_back(std::move(r));
    }
    if (t.has(RatingKind::wepts))
        t.primary = RatingKind::wepts;
    else if (t.has(RatingKind::rapm))
        t.primary = RatingKind::rapm;
    else if (t.has(RatingKind::rapm_binomial))
        t.primary = RatingKind::rapm_binomial;
    else if (t.has(RatingKind::epts))
        t.primary = RatingKind::epts;
    return t;
}

nlohmann::json rating_table_to_json(const RatingTable& table)
{
    nlohmann::json rows = nlohmann::json::array();
    const auto val = [](const std::optional<double>& v) {
        return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    for (const RatingRow& r : table.rows) {
        rows.push_back({{"player", r.player},
                        {"team", r.team},
                        {"side", to_string(r.side)},
                        {"rapm", val(r.rapm)},
                        {"rapm_binomial", val(r.rapm_binomial)},
                        {"epts", val(r.epts)},
                        {"wepts", val(r.wepts)},
                        {"weight", r.weight},
                        {"is_reference", r.is_reference},
                        {"rank", r.rank}});
    }
    return {{"metadata", table.metadata},
            {"primary", to_string(table.primary)},
            {"sign_convention", to_string(table.sign)},
            {"rows", std::move(rows)}};
}

} // namespace rapm
