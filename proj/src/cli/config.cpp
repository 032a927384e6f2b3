#include <fmt/format.h>

#include "rapm/cli.hpp"
#include "rapm/errors.hpp"

namespace rapm::cli {

void RunConfig::validate() const
{
    if (folds < 2)
        throw ConfigError(fmt::format("--folds must be at least 2, got {}", folds));
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw ConfigError(fmt::format("--alpha must lie in [0, 1], got {}", alpha));
    if (lambda && !(*lambda >= 0.0))
        throw ConfigError(fmt::format("--lambda must be non-negative, got {}", *lambda));
    if (n_lambda < 1)
        throw ConfigError("--n-lambda must be positive");
    if (!(lambda_ratio > 0.0 && lambda_ratio < 1.0))
        throw ConfigError(fmt::format("--lambda-ratio must lie in (0, 1), got {}", lambda_ratio));
    if (!(ltp_minutes >= 0.0))
        throw ConfigError("--ltp-minutes must be non-negative");
    if (!(rapm_scale > 0.0))
        throw ConfigError(fmt::format("--rapm-scale must be positive, got {}", rapm_scale));
    if (!lambda && alpha == 0.0 && n_lambda < 2)
        throw ConfigError("cross-validation needs at least two lambda values");
}

FitSpec RunConfig::fit_spec() const
{
    FitSpec s;
    s.family = family;
    s.alpha = alpha;
    s.lambda = lambda.value_or(0.0);
    s.standardize = standardize;
    s.tol = tol;
    s.validate();
    return s;
}

} // namespace rapm::cli
