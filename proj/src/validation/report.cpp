#include <algorithm>

#include <fmt/format.h>

#include "rapm/errors.hpp"
#include "rapm/validation.hpp"

namespace rapm {

ValidationReport validate_ratings(const RatingTable& table, RatingKind kind, std::string label,
                                  const ValidationInputs& inputs, const ValidationOptions& options)
{
    ValidationReport r;
    r.label = std::move(label);
    r.kind = kind;
    if (!table.has(kind))
        throw InputError(fmt::format("rating table has no {} values", to_string(kind)));
    if (inputs.all_nba.empty())
        r.warnings.push_back("criterion 1 skipped: no all-NBA list");
    else if (inputs.positions.empty())
        r.warnings.push_back("criterion 1 skipped: no positions");
    else
        r.criterion1 = criterion_all_nba(table, kind, inputs, options.all_nba);
    if (inputs.minutes.empty()) {
        r.warnings.push_back("criteria 2 and 3 skipped: no minutes");
    } else {
        r.criterion2 = criterion_low_time(table, kind, inputs, options.top_n,
                                          options.bottom_minutes_n);
        r.criterion3 = criterion_starters(table, kind, inputs, options.top_n);
    }
    r.criterion4 = criterion_box_score(table, kind, inputs, options.top_n, &r.warnings);
    return r;
}

namespace {

nlohmann::json selection_json(const Selection& s)
{
    return {{"pct", s.pct}, {"hits", s.hits}, {"size", s.size}};
}

} // namespace

nlohmann::json report_to_json(const std::vector<ValidationReport>& reports)
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : reports) {
        nlohmann::json j = {{"label", r.label}, {"rating", to_string(r.kind)}};
        j["criterion1"] = r.criterion1 ? selection_json(*r.criterion1) : nlohmann::json(nullptr);
        j["criterion2"] = r.criterion2 ? selection_json(*r.criterion2) : nlohmann::json(nullptr);
        if (r.criterion3) {
            j["criterion3a"] = selection_json(r.criterion3->top);
            j["criterion3b"] = selection_json(r.criterion3->bottom);
        } else {
            j["criterion3a"] = nullptr;
            j["criterion3b"] = nullptr;
        }
        nlohmann::json c4 = nlohmann::json::object();
        for (const auto& [stat, s] : r.criterion4)
            c4[stat] = selection_json(s);
        j["criterion4"] = std::move(c4);
        j["warnings"] = r.warnings;
        out.push_back(std::move(j));
    }
    return {{"reports", std::move(out)}};
}

std::string report_to_text(const std::vector<ValidationReport>& reports)
{
    std::vector<std::string> headers = {"method", "C1", "C2", "C3a", "C3b"};
    for (const char* s : kBoxStatNames)
        headers.emplace_back(s);
    std::vector<std::vector<std::string>> cells;
    const auto pct = [](const std::optional<Selection>& s) {
        return s ? fmt::format("{:.1f}", s->pct) : std::string("-");
    };
    for (const auto& r : reports) {
        std::vector<std::string> row = {r.label, pct(r.criterion1), pct(r.criterion2)};
        row.push_back(r.criterion3 ? pct(r.criterion3->top) : "-");
        row.push_back(r.criterion3 ? pct(r.criterion3->bottom) : "-");
        for (const char* s : kBoxStatNames) {
            auto it = r.criterion4.find(s);
            row.push_back(it == r.criterion4.end() ? "-" : pct(it->second));
        }
        cells.push_back(std::move(row));
    }
    std::vector<std::size_t> width(headers.size());
    for (std::size_t c = 0; c < headers.size(); ++c) {
        width[c] = headers[c].size();
        for (const auto& row : cells)
            width[c] = std::max(width[c], row[c].size());
    }
    std::string out;
    const auto line = [&](const std::vector<std::string>& row) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c == 0)
                out += fmt::format("{:<{}}", row[c], width[c]);
            else
                out += fmt::format("  {:>{}}", row[c], width[c]);
        }
        out += '\n';
    };
    line(headers);
    for (const auto& row : cells)
        line(row);
    return out;
}

} // namespace rapm
