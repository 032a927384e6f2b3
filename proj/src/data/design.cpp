#include "rapm/design.hpp"

#include <algorithm>
#include <unordered_map>

#include <fmt/core.h>

#include "rapm/errors.hpp"

namespace rapm {

DesignMatrix::DesignMatrix(std::size_t n_rows, std::vector<ColumnInfo> columns,
                           std::vector<Entry> entries)
    : n_rows_(n_rows), columns_(std::move(columns))
{
    const std::size_t m = columns_.size();
    for (const auto& e : entries)
        if (e.row >= n_rows_ || e.col >= m)
            throw InputError(fmt::format("entry ({}, {}) outside {} x {} matrix", e.row, e.col,
                                         n_rows_, m));
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return a.col != b.col ? a.col < b.col : a.row < b.row;
    });
    col_start_.assign(m + 1, 0);
    row_index_.reserve(entries.size());
    values_.reserve(entries.size());
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const auto& e = entries[k];
        if (!row_index_.empty() && k > 0 && entries[k - 1].col == e.col &&
            entries[k - 1].row == e.row) {
            values_.back() += e.value;
            continue;
        }
        row_index_.push_back(e.row);
        values_.push_back(e.value);
        ++col_start_[e.col + 1];
    }
    for (std::size_t j = 0; j < m; ++j)
        col_start_[j + 1] += col_start_[j];
}

std::vector<bool> DesignMatrix::penalty_mask() const
{
    std::vector<bool> mask(cols());
    for (std::size_t j = 0; j < cols(); ++j)
        mask[j] = columns_[j].penalized;
    return mask;
}

std::optional<std::size_t> DesignMatrix::find_column(const std::string& name) const
{
    for (std::size_t j = 0; j < columns_.size(); ++j)
        if (columns_[j].name == name)
            return j;
    return std::nullopt;
}

DesignMatrix DesignMatrix::select_rows(std::span<const std::size_t> rows) const
{
    // old row -> list of new rows
    std::vector<std::uint32_t> first(n_rows_, UINT32_MAX), next(rows.size(), UINT32_MAX);
    for (std::size_t r = rows.size(); r-- > 0;) {
        if (rows[r] >= n_rows_)
            throw InputError(fmt::format("row {} out of range", rows[r]));
        next[r] = first[rows[r]];
        first[rows[r]] = static_cast<std::uint32_t>(r);
    }
    DesignMatrix out;
    out.n_rows_ = rows.size();
    out.columns_ = columns_;
    out.n_extra_ = n_extra_;
    out.n_players_ = n_players_;
    out.col_start_.assign(cols() + 1, 0);
    std::vector<std::pair<std::uint32_t, double>> col;
    for (std::size_t j = 0; j < cols(); ++j) {
        col.clear();
        auto idx = column_rows(j);
        auto val = column_values(j);
        for (std::size_t k = 0; k < idx.size(); ++k)
            for (auto r = first[idx[k]]; r != UINT32_MAX; r = next[r])
                col.emplace_back(r, val[k]);
        std::sort(col.begin(), col.end());
        for (const auto& [r, v] : col) {
            out.row_index_.push_back(r);
            out.values_.push_back(v);
        }
        out.col_start_[j + 1] = out.row_index_.size();
    }
    return out;
}

DesignMatrix DesignMatrix::select_columns(std::span<const std::size_t> cols) const
{
    DesignMatrix out;
    out.n_rows_ = n_rows_;
    out.col_start_.assign(1, 0);
    for (std::size_t j : cols) {
        if (j >= this->cols())
            throw InputError(fmt::format("column {} out of range", j));
        out.columns_.push_back(columns_[j]);
        auto idx = column_rows(j);
        auto val = column_values(j);
        out.row_index_.insert(out.row_index_.end(), idx.begin(), idx.end());
        out.values_.insert(out.values_.end(), val.begin(), val.end());
        out.col_start_.push_back(out.row_index_.size());
    }
    return out;
}

std::vector<double> DesignMatrix::multiply(std::span<const double> beta) const
{
    if (beta.size() != cols())
        throw InputError(fmt::format("coefficient length {} does not match {} columns",
                                     beta.size(), cols()));
    std::vector<double> out(n_rows_, 0.0);
    for (std::size_t j = 0; j < cols(); ++j) {
        if (beta[j] == 0.0)
            continue;
        auto idx = column_rows(j);
        auto val = column_values(j);
        for (std::size_t k = 0; k < idx.size(); ++k)
            out[idx[k]] += val[k] * beta[j];
    }
    return out;
}

Eigen::MatrixXd DesignMatrix::to_dense() const
{
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_rows_),
                                              static_cast<Eigen::Index>(cols()));
    for (std::size_t j = 0; j < cols(); ++j) {
        auto idx = column_rows(j);
        auto val = column_values(j);
        for (std::size_t k = 0; k < idx.size(); ++k)
            d(idx[k], static_cast<Eigen::Index>(j)) = val[k];
    }
    return d;
}

ResponseSet make_responses(std::span<const int> pts)
{
    ResponseSet y;
    y.pts.assign(pts.begin(), pts.end());
    y.points.reserve(pts.size());
    y.scored.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        y.points.push_back(pts[i]);
        y.scored.push_back(pts[i] > 0 ? 1.0 : 0.0);
        const int c = score_category(pts[i]);
        for (int l = 1; l <= 3; ++l) {
            if (c == 0 || c == l) {
                auto& sub = y.categories[l - 1];
                sub.rows.push_back(i);
                sub.indicator.push_back(c == l ? 1.0 : 0.0);
            }
        }
    }
    return y;
}

EncodedData encode_design(const PossessionLog& log, const PlayerRegistry& registry,
                          const EncodeOptions& options)
{
    const std::size_t n = log.rows.size();
    const std::size_t k_players = registry.size();

    std::vector<ColumnInfo> columns;
    if (options.home_off)
        columns.push_back({"home_off", ColumnKind::extra, options.penalize_extras});
    if (options.season_type)
        columns.push_back({"season_type", ColumnKind::extra, options.penalize_extras});
    const std::size_t n_extra = columns.size();
    for (const auto& p : registry.players())
        columns.push_back({"O:" + p.key, ColumnKind::player_offense, true});
    for (const auto& p : registry.players())
        columns.push_back({"D:" + p.key, ColumnKind::player_defense, true});

    // log id -> registry index (or none when filtered out)
    constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
    std::vector<std::size_t> slot(log.player_count(), kAbsent);
    for (PlayerId id = 0; id < log.player_count(); ++id)
        if (auto i = registry.find(log.player_key(id)))
            slot[id] = *i;

    std::vector<Entry> entries;
    entries.reserve(n * (10 + n_extra));
    std::vector<int> pts(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = log.rows[i];
        const auto row = static_cast<std::uint32_t>(i);
        pts[i] = p.points;
        std::uint32_t c = 0;
        if (options.home_off) {
            if (p.offense_is_home)
                entries.push_back({row, c, 1.0});
            ++c;
        }
        if (options.season_type) {
            if (p.season_type == SeasonType::playoff)
                entries.push_back({row, c, 1.0});
            ++c;
        }
        for (PlayerId id : p.offense)
            if (slot[id] != kAbsent)
                entries.push_back({row, static_cast<std::uint32_t>(n_extra + slot[id]), 1.0});
        for (PlayerId id : p.defense)
            if (slot[id] != kAbsent)
                entries.push_back(
                    {row, static_cast<std::uint32_t>(n_extra + k_players + slot[id]), -1.0});
    }

    EncodedData out{DesignMatrix(n, std::move(columns), std::move(entries)), make_responses(pts)};
    out.x.set_player_layout(n_extra, k_players);
    return out;
}

} // namespace rapm
