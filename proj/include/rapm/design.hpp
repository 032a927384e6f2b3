#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rapm/possession.hpp"
#include "rapm/registry.hpp"

namespace rapm {

enum class ColumnKind : std::uint8_t { extra, player_offense, player_defense };

struct ColumnInfo {
    std::string name;
    ColumnKind kind = ColumnKind::extra;
    bool penalized = true;
};

struct Entry {
    std::uint32_t row = 0;
    std::uint32_t col = 0;
    double value = 0.0;
};

/// Sparse n x m matrix in compressed-column form.
///
/// Column j holds rows row_index()[col_start(j) .. col_start(j+1)) in ascending order.
class DesignMatrix {
public:
    DesignMatrix() = default;
    /// Entries may come in any order; duplicates (same row and column) are summed.
    DesignMatrix(std::size_t n_rows, std::vector<ColumnInfo> columns, std::vector<Entry> entries);

    std::size_t rows() const { return n_rows_; }
    std::size_t cols() const { return columns_.size(); }
    std::size_t nonzeros() const { return values_.size(); }

    std::span<const std::uint32_t> column_rows(std::size_t j) const
    {
        return {row_index_.data() + col_start_[j], col_start_[j + 1] - col_start_[j]};
    }
    std::span<const double> column_values(std::size_t j) const
    {
        return {values_.data() + col_start_[j], col_start_[j + 1] - col_start_[j]};
    }

    const ColumnInfo& column(std::size_t j) const { return columns_[j]; }
    const std::vector<ColumnInfo>& columns() const { return columns_; }
    std::vector<bool> penalty_mask() const;
    void set_penalized(std::size_t j, bool penalized) { columns_[j].penalized = penalized; }
    std::optional<std::size_t> find_column(const std::string& name) const;

    /// Rows in the given order (duplicates allowed).
    DesignMatrix select_rows(std::span<const std::size_t> rows) const;
    DesignMatrix select_columns(std::span<const std::size_t> cols) const;

    /// X * beta.
    std::vector<double> multiply(std::span<const double> beta) const;
    Eigen::MatrixXd to_dense() const;

    /// Player-block layout (zero when the matrix was not produced by encode_design).
    std::size_t extra_count() const { return n_extra_; }
    std::size_t player_count() const { return n_players_; }
    std::size_t offense_column(std::size_t player_index) const { return n_extra_ + player_index; }
    std::size_t defense_column(std::size_t player_index) const
    {
        return n_extra_ + n_players_ + player_index;
    }
    void set_player_layout(std::size_t n_extra, std::size_t n_players)
    {
        n_extra_ = n_extra;
        n_players_ = n_players;
    }

private:
    std::size_t n_rows_ = 0;
    std::vector<ColumnInfo> columns_;
    std::vector<std::size_t> col_start_{0};
    std::vector<std::uint32_t> row_index_;
    std::vector<double> values_;
    std::size_t n_extra_ = 0;
    std::size_t n_players_ = 0;
};

/// Rows and 0/1 response of one "l versus no points" binomial component.
struct CategorySubset {
    std::vector<std::size_t> rows;
    std::vector<double> indicator;
};

struct ResponseSet {
    std::vector<int> pts;
    std::vector<double> points;  ///< pts as reals
    std::vector<double> scored;  ///< I(pts > 0)
    /// Components l = 1, 2, 3+ at index l - 1: rows with pts in {0, l}
    /// (pts >= 3 for the last), indicator I(pts == l) on those rows.
    std::array<CategorySubset, 3> categories;
};

/// Score category 0, 1, 2 or 3 (3 or more points).
inline int score_category(int pts) { return pts >= 3 ? 3 : pts; }

ResponseSet make_responses(std::span<const int> pts);

struct EncodeOptions {
    bool home_off = false;     ///< add home_off (0/1) column
    bool season_type = false;  ///< add playoff indicator (0/1) column
    bool penalize_extras = true;
};

struct EncodedData {
    DesignMatrix x;
    ResponseSet y;
};

/// Builds the design matrix: extra covariates first, then one +1 offensive column
/// and one -1 defensive column per registry player. Players absent from the
/// registry contribute nothing (reference group).
EncodedData encode_design(const PossessionLog& log, const PlayerRegistry& registry,
                          const EncodeOptions& options = {});

} // namespace rapm
