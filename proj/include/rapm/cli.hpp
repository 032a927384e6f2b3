#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rapm/glm.hpp"
#include "rapm/model_selection.hpp"
#include "rapm/ratings.hpp"
#include "rapm/synth.hpp"

namespace rapm::cli {

enum ExitCode : int { kOk = 0, kNumerical = 1, kInput = 2 };

/// Settings shared by the subcommands. Each field has a matching flag.
struct RunConfig {
    std::filesystem::path possessions;
    std::filesystem::path boxscore;
    std::filesystem::path all_nba;
    std::filesystem::path model;  ///< fit.json or multinomial.json for rate / gof
    std::vector<std::filesystem::path> ratings;  ///< rating CSVs for validate
    std::filesystem::path out = ".";

    Family family = Family::gaussian;
    double alpha = 1.0;
    std::optional<double> lambda;
    int folds = 10;
    std::uint64_t seed = 1;
    CvMetric metric = CvMetric::rmse;
    std::size_t n_lambda = 100;
    double lambda_ratio = 1e-4;
    double tol = 1e-7;
    bool use_1se = false;

    double ltp_minutes = 200.0;  ///< 0 disables the low-time filter
    std::optional<std::size_t> ltp_possessions;
    bool standardize = true;
    bool home_off = false;
    bool season_type = false;
    bool penalize_extras = true;

    SignConvention sign = SignConvention::model;
    bool after_lasso = false;
    bool shrinkage = false;  ///< fit: also report shrinkage against the unpenalized fit
    double rapm_scale = 1.0;  ///< multiplies reported RAPM values
    bool merge_traded = false;
    std::size_t sims = 1000;
    bool gof = true;
    std::optional<RatingKind> rating;  ///< validate: rating to evaluate (default: table primary)
    bool offense_only = false;
    std::size_t top_n = 50;

    /// Throws ConfigError for out-of-range values.
    void validate() const;
    FitSpec fit_spec() const;
};

/// Parses argv and runs one subcommand. Messages go to `out` / `err`.
/// Returns 0 on success, 1 on numerical failure, 2 on input or configuration errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

int cmd_ingest(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_fit(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_multinomial(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_rate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_gof(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_synth(const SynthConfig& synth, const std::filesystem::path& out_dir, std::ostream& out,
              std::ostream& err);

} // namespace rapm::cli
