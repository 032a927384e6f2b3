#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "rapm/cli.hpp"
#include "rapm/csv.hpp"
#include "rapm/design.hpp"
#include "rapm/errors.hpp"
#include "rapm/io.hpp"
#include "rapm/possession.hpp"
#include "rapm/registry.hpp"
#include "rapm/validation.hpp"

namespace fs = std::filesystem;

namespace rapm::cli {

namespace {

constexpr std::size_t kShownRowErrors = 5;

struct Loaded {
    PossessionLog log;
    std::vector<BoxScoreRow> box;
    bool has_box = false;
    PlayerRegistry full;
    PlayerRegistry kept;
    std::vector<std::string> removed;
    EncodedData data;
};

void require_file(const fs::path& p, const char* what)
{
    if (p.empty())
        throw InputError(fmt::format("no {} file given", what));
    if (!fs::is_regular_file(p))
        throw InputError(fmt::format("{} file not found: {}", what, p.string()));
}

void warn(std::ostream& err, const std::vector<std::string>& warnings)
{
    for (const auto& w : warnings)
        err << "warning: " << w << '\n';
}

Loaded load(const RunConfig& cfg, std::ostream& err)
{
    require_file(cfg.possessions, "possessions");
    Loaded d;
    d.log = parse_possessions(cfg.possessions);
    if (!d.log.errors.empty()) {
        err << fmt::format("warning: skipped {} malformed possession row(s)\n", d.log.errors.size());
        for (std::size_t i = 0; i < std::min(kShownRowErrors, d.log.errors.size()); ++i)
            err << fmt::format("  line {}: {}\n", d.log.errors[i].line, d.log.errors[i].message);
    }
    if (!cfg.boxscore.empty()) {
        require_file(cfg.boxscore, "box-score");
        d.box = parse_box_score(cfg.boxscore);
        d.has_box = true;
    }
    d.full = build_registry(d.log, d.has_box ? &d.box : nullptr);
    warn(err, d.full.warnings);
    if (cfg.ltp_minutes > 0.0 && (d.has_box || cfg.ltp_possessions)) {
        FilterResult f = filter_low_time(d.full, {cfg.ltp_minutes, cfg.ltp_possessions});
        d.kept = std::move(f.kept);
        d.removed = std::move(f.removed);
    } else {
        d.kept = d.full;
    }
    if (d.kept.size() == 0)
        throw InputError("every player was removed by the low-time filter");
    d.data = encode_design(d.log, d.kept,
                           {cfg.home_off, cfg.season_type, cfg.penalize_extras});
    return d;
}

nlohmann::json run_metadata(const RunConfig& cfg, const Loaded& d)
{
    return {{"possessions", d.log.rows.size()},
            {"players", d.full.size()},
            {"players_rated", d.kept.size()},
            {"low_time_removed", d.removed},
            {"ltp_minutes", cfg.ltp_minutes},
            {"standardize", cfg.standardize},
            {"seed", cfg.seed},
            {"folds", cfg.folds}};
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + '\n'; }

void write_table(io::OutputSet& outputs, const std::string& stem, RatingTable table,
                 const RunConfig& cfg, const PlayerRegistry& registry)
{
    outputs.write(stem + ".csv", rating_table_to_csv(table));
    outputs.write(stem + ".json", dump(rating_table_to_json(table)));
    if (cfg.merge_traded) {
        RatingTable merged = merge_traded(table, registry);
        outputs.write(stem + "_merged.csv", rating_table_to_csv(merged));
    }
}

const std::vector<double>& response_for(Family family, const ResponseSet& y)
{
    return family == Family::gaussian ? y.points : y.scored;
}

} // namespace

int cmd_ingest(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    cfg.validate();
    const Loaded d = load(cfg, err);
    io::OutputSet outputs(cfg.out);

    std::array<std::size_t, 7> pts{};
    for (const auto& p : d.log.rows)
        ++pts[static_cast<std::size_t>(p.points)];
    nlohmann::json row_errors = nlohmann::json::array();
    for (const auto& e : d.log.errors)
        row_errors.push_back({{"line", e.line}, {"message", e.message}});
    nlohmann::json summary = run_metadata(cfg, d);
    summary["teams"] = d.full.teams().size();
    summary["pts_counts"] = pts;
    summary["top_category_points"] = top_category_points(d.data.y.pts);
    summary["design"] = {{"rows", d.data.x.rows()},
                         {"columns", d.data.x.cols()},
                         {"nonzeros", d.data.x.nonzeros()}};
    summary["row_errors"] = std::move(row_errors);
    outputs.write("ingest.json", dump(summary));

    std::string players = "player,team,n_offense,n_defense,minutes,low_time\n";
    const std::set<std::string> removed(d.removed.begin(), d.removed.end());
    for (const auto& p : d.full.players())
        players += fmt::format("{},{},{},{},{},{}\n", csv::escape(p.key), csv::escape(p.team),
                               p.n_offense, p.n_defense,
                               p.minutes ? io::format_double(*p.minutes) : "",
                               removed.contains(p.key) ? 1 : 0);
    outputs.write("players.csv", players);
    outputs.commit();
    out << fmt::format("{} possessions, {} players ({} low-time), {} teams; {} bad rows\n",
                       d.log.rows.size(), d.full.size(), d.removed.size(), d.full.teams().size(),
                       d.log.errors.size());
    return kOk;
}

int cmd_fit(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    cfg.validate();
    const FitSpec spec = cfg.fit_spec();
    const Loaded d = load(cfg, err);
    const auto& x = d.data.x;
    const auto& y = response_for(cfg.family, d.data.y);
    io::OutputSet outputs(cfg.out);

    FitResult fit;
    std::optional<CvResult> cv;
    if (cfg.lambda) {
        fit = rapm::fit(x, y, spec);
    } else {
        const auto path = lambda_path(x, y, spec, cfg.n_lambda, cfg.lambda_ratio);
        cv = cross_validate(x, y, spec, path, cfg.folds, cfg.seed, cfg.metric);
        warn(err, cv->warnings);
        const std::size_t target = cfg.use_1se ? cv->index_1se : cv->index_min;
        PathSolver solver(x, y, spec);
        for (std::size_t k = 0; k <= target; ++k)
            fit = solver.solve(path[k]);
        outputs.write("cv.json", dump(cv_to_json(*cv)));
        out << cv_to_text(*cv);
    }
    warn(err, fit.warnings);
    if (!fit.converged)
        err << "warning: final fit did not converge\n";

    nlohmann::json j = fit_to_json(fit, x);
    j["run"] = run_metadata(cfg, d);
    j["lambda_source"] = cfg.lambda ? "fixed" : (cfg.use_1se ? "lambda_1se" : "lambda_min");
    if (cfg.shrinkage) {
        std::vector<std::size_t> all(x.cols());
        std::iota(all.begin(), all.end(), std::size_t{0});
        const FitResult ols = after_lasso_refit(x, y, cfg.family, all);
        warn(err, ols.warnings);
        j["shrinkage"] = shrinkage_fraction(fit, ols, x);
        out << fmt::format("shrinkage against the unpenalized fit: {:.2f}%\n",
                           100.0 * j["shrinkage"].get<double>());
    }
    outputs.write("fit.json", dump(j));

    RatingTable table = rapm_table(cfg.family == Family::gaussian ? &fit : nullptr,
                                   cfg.family == Family::binomial ? &fit : nullptr, x, d.kept);
    scale_rapm(table, cfg.rapm_scale);
    table.metadata["run"] = run_metadata(cfg, d);
    write_table(outputs, "ratings", table, cfg, d.kept);

    if (cfg.after_lasso) {
        const auto support = support_of(fit);
        FitResult refit = after_lasso_refit(x, y, cfg.family, support);
        warn(err, refit.warnings);
        outputs.write("fit_after_lasso.json", dump(fit_to_json(refit, x)));
        RatingTable t2 = rapm_table(cfg.family == Family::gaussian ? &refit : nullptr,
                                    cfg.family == Family::binomial ? &refit : nullptr, x, d.kept);
        scale_rapm(t2, cfg.rapm_scale);
        t2.metadata["after_lasso"] = true;
        write_table(outputs, "ratings_after_lasso", t2, cfg, d.kept);
    }
    outputs.commit();
    out << fmt::format("{} fit: lambda {} , {} nonzero penalized coefficients\n",
                       to_string(cfg.family), fit.lambda, fit.n_nonzero);
    return kOk;
}

int cmd_multinomial(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    cfg.validate();
    const Loaded d = load(cfg, err);
    MultinomialOptions opt;
    opt.spec = cfg.fit_spec();
    if (cfg.lambda)
        opt.lambda = {cfg.lambda, cfg.lambda, cfg.lambda};
    opt.folds = cfg.folds;
    opt.seed = cfg.seed;
    opt.metric = cfg.metric;
    opt.n_lambda = cfg.n_lambda;
    opt.lambda_ratio = cfg.lambda_ratio;
    opt.use_1se = cfg.use_1se;
    io::OutputSet outputs(cfg.out);

    const MultinomialFit fit = fit_multinomial(d.data.x, d.data.y, d.kept, opt);
    warn(err, fit.warnings);

    nlohmann::json j = multinomial_to_json(fit, d.data.x);
    j["run"] = run_metadata(cfg, d);
    const auto expected = expected_points_per_row(fit, d.data.x);
    j["rmse"] = model_rmse(expected, d.data.y.pts);
    outputs.write("multinomial.json", dump(j));

    nlohmann::json cvs = nlohmann::json::array();
    for (const auto& c : fit.cv)
        cvs.push_back(c ? cv_to_json(*c) : nlohmann::json(nullptr));
    if (!cfg.lambda)
        outputs.write("cv.json", dump({{"components", cvs}}));

    RatingTable table = multinomial_table(fit, d.kept, cfg.sign);
    table.metadata["run"] = run_metadata(cfg, d);
    write_table(outputs, "ratings", table, cfg, d.kept);

    if (cfg.gof) {
        const GoodnessOfFit g = goodness_of_fit(fit, d.data.x, d.data.y.pts, cfg.sims, cfg.seed + 1);
        outputs.write("gof.json", dump(gof_to_json(g)));
        out << fmt::format("goodness of fit: chi2 {:.4g}, p-value {:.3f} ({} simulations)\n",
                           g.chi2_observed, g.p_value, g.n_sims);
    }
    outputs.commit();
    out << fmt::format("multinomial fit: c3 {:.4g}, EPTS0 {:.4f}, rmse {:.4f}\n", fit.c3,
                       epts_reference(fit), j["rmse"].get<double>());
    for (std::size_t l = 0; l < 3; ++l) {
        if (fit.components[l])
            out << fmt::format("  component {}: lambda {:.6g}, {} nonzero\n", l + 1,
                               fit.components[l]->lambda, fit.components[l]->n_nonzero);
        else
            out << fmt::format("  component {}: skipped\n", l + 1);
    }
    return kOk;
}

namespace {

nlohmann::json read_json(const fs::path& p, const char* what)
{
    require_file(p, what);
    try {
        return nlohmann::json::parse(io::read_file(p));
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(fmt::format("{} is not valid JSON: {}", p.string(), e.what()));
    }
}

} // namespace

int cmd_rate(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    cfg.validate();
    const nlohmann::json model = read_json(cfg.model, "model");
    const Loaded d = load(cfg, err);
    io::OutputSet outputs(cfg.out);
    RatingTable table;
    if (model.value("model", "") == "multinomial") {
        MultinomialFit fit = multinomial_from_json(model, d.data.x, d.kept);
        warn(err, fit.warnings);
        table = multinomial_table(fit, d.kept, cfg.sign);
    } else {
        std::vector<std::string> unmatched;
        FitResult fit = fit_from_json(model, d.data.x, &unmatched);
        if (!unmatched.empty())
            err << fmt::format("warning: {} coefficient(s) name columns absent from the design\n",
                               unmatched.size());
        table = rapm_table(fit.family == Family::gaussian ? &fit : nullptr,
                           fit.family == Family::binomial ? &fit : nullptr, d.data.x, d.kept);
        scale_rapm(table, cfg.rapm_scale);
    }
    table.metadata["run"] = run_metadata(cfg, d);
    write_table(outputs, "ratings", table, cfg, d.kept);
    outputs.commit();
    out << fmt::format("rated {} players ({})\n", d.kept.size(), to_string(table.primary));
    return kOk;
}

int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    if (cfg.ratings.empty())
        throw ConfigError("validate needs at least one --ratings file");
    require_file(cfg.boxscore, "box-score");
    std::vector<std::string> all_nba;
    if (!cfg.all_nba.empty()) {
        require_file(cfg.all_nba, "all-NBA");
        all_nba = read_all_nba(cfg.all_nba);
    }
    const ValidationInputs inputs = make_validation_inputs(parse_box_score(cfg.boxscore), all_nba);
    warn(err, inputs.warnings);

    ValidationOptions opt;
    opt.all_nba.offense_only = cfg.offense_only;
    opt.top_n = cfg.top_n;
    opt.bottom_minutes_n = cfg.top_n;
    std::vector<ValidationReport> reports;
    for (const auto& path : cfg.ratings) {
        require_file(path, "ratings");
        std::ifstream in(path);
        RatingTable table = rating_table_from_csv(in);
        table.sign = cfg.sign;
        const RatingKind kind = cfg.rating.value_or(table.primary);
        reports.push_back(validate_ratings(table, kind,
                                           fmt::format("{} {}", path.stem().string(), to_string(kind)),
                                           inputs, opt));
        warn(err, reports.back().warnings);
    }
    io::OutputSet outputs(cfg.out);
    outputs.write("validation.json", dump(report_to_json(reports)));
    const std::string text = report_to_text(reports);
    outputs.write("validation.txt", text);
    outputs.commit();
    out << text;
    return kOk;
}

int cmd_gof(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    cfg.validate();
    const nlohmann::json model = read_json(cfg.model, "model");
    if (model.value("model", "") != "multinomial")
        throw InputError("gof needs a multinomial model file");
    const Loaded d = load(cfg, err);
    MultinomialFit fit = multinomial_from_json(model, d.data.x, d.kept);
    warn(err, fit.warnings);
    const GoodnessOfFit g = goodness_of_fit(fit, d.data.x, d.data.y.pts, cfg.sims, cfg.seed + 1);
    io::OutputSet outputs(cfg.out);
    nlohmann::json j = gof_to_json(g);
    j["rmse"] = model_rmse(expected_points_per_row(fit, d.data.x), d.data.y.pts);
    outputs.write("gof.json", dump(j));
    outputs.commit();
    out << fmt::format("chi2 {:.4g}, p-value {:.3f} ({} simulations), rmse {:.4f}\n",
                       g.chi2_observed, g.p_value, g.n_sims, j["rmse"].get<double>());
    return kOk;
}

int cmd_synth(const SynthConfig& synth, const fs::path& out_dir, std::ostream& out, std::ostream&)
{
    const SynthData data = generate_synthetic(synth);
    io::OutputSet outputs(out_dir);
    outputs.write("possessions.csv", data.possessions_csv);
    outputs.write("boxscore.csv", data.box_score_csv);
    outputs.write("all_nba.txt", data.all_nba);
    outputs.write("ledger.json", dump(data.ledger));
    outputs.commit();
    out << fmt::format("wrote {} possessions for {} players to {}\n", synth.n_possessions,
                       data.players.size(), out_dir.string());
    return kOk;
}

namespace {

void add_data_flags(CLI::App* app, RunConfig& cfg, bool need_possessions)
{
    auto* p = app->add_option("--possessions", cfg.possessions, "Possession CSV");
    if (need_possessions)
        p->required();
    app->add_option("--boxscore", cfg.boxscore, "Box-score CSV (minutes, positions, stats)");
    app->add_option("--ltp-minutes", cfg.ltp_minutes,
                    "Drop players below this many minutes (0 keeps everyone)")
        ->capture_default_str();
    app->add_option("--ltp-possessions", cfg.ltp_possessions,
                    "Possession-count threshold used when minutes are unavailable");
    app->add_flag("--home-off", cfg.home_off, "Add the home-offense covariate");
    app->add_flag("--season-type", cfg.season_type, "Add the playoff covariate");
    app->add_flag("!--no-penalize-extras", cfg.penalize_extras,
                  "Leave covariates unpenalized");
    app->add_option("--out", cfg.out, "Output directory")->capture_default_str();
}

void add_fit_flags(CLI::App* app, RunConfig& cfg, std::string& metric)
{
    app->add_option("--alpha", cfg.alpha, "Elastic-net mixing (1 lasso, 0 ridge)")
        ->capture_default_str();
    app->add_option("--lambda", cfg.lambda, "Fixed penalty; skips cross-validation");
    app->add_option("--folds", cfg.folds, "Cross-validation folds")->capture_default_str();
    app->add_option("--seed", cfg.seed, "Seed for folds and simulations")->capture_default_str();
    app->add_option("--metric", metric, "CV metric: rmse or deviance")->capture_default_str();
    app->add_option("--n-lambda", cfg.n_lambda, "Values on the lambda path")->capture_default_str();
    app->add_option("--lambda-ratio", cfg.lambda_ratio, "Smallest / largest lambda")
        ->capture_default_str();
    app->add_option("--tol", cfg.tol, "Coordinate-descent tolerance")->capture_default_str();
    app->add_flag("--standardize,!--no-standardize", cfg.standardize,
                  "Penalize columns on the unit-variance scale")
        ->capture_default_str();
    app->add_flag("--use-1se", cfg.use_1se, "Use lambda_1se instead of lambda_min");
}

void add_sign_flag(CLI::App* app, std::string& sign)
{
    app->add_option("--sign-convention", sign, "Defensive sign: model or paper")
        ->capture_default_str();
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Regularized adjusted plus-minus and expected-points player ratings"};
    app.set_config("--config", "", "Config file (key = value, one [section] per subcommand)");
    app.require_subcommand(1);

    RunConfig cfg;
    SynthConfig synth;
    std::string family = "gaussian", metric = "rmse", sign = "model", rating;
    fs::path synth_out = ".";

    auto* ingest = app.add_subcommand("ingest", "Parse and summarize the possession data");
    add_data_flags(ingest, cfg, true);

    auto* fit = app.add_subcommand("fit", "Normal or binomial RAPM with cross-validated lambda");
    add_data_flags(fit, cfg, true);
    add_fit_flags(fit, cfg, metric);
    fit->add_option("--family", family, "gaussian or binomial")->capture_default_str();
    fit->add_flag("--after-lasso", cfg.after_lasso, "Also write an unpenalized refit on the support");
    fit->add_flag("--shrinkage", cfg.shrinkage,
                  "Report 1 - |beta|_1 / |beta_unpenalized|_1 over player columns");
    fit->add_option("--rapm-scale", cfg.rapm_scale, "Multiplier for reported RAPM (100: per 100 possessions)")
        ->capture_default_str();
    fit->add_flag("--merge-traded", cfg.merge_traded, "Also write ratings merged across teams");

    auto* multi = app.add_subcommand("multinomial", "Expected-points ratings from three binomial fits");
    add_data_flags(multi, cfg, true);
    add_fit_flags(multi, cfg, metric);
    add_sign_flag(multi, sign);
    multi->add_option("--sims", cfg.sims, "Goodness-of-fit simulations")->capture_default_str();
    multi->add_flag("!--no-gof", cfg.gof, "Skip the goodness-of-fit simulation");
    multi->add_flag("--merge-traded", cfg.merge_traded, "Also write ratings merged across teams");

    auto* rate = app.add_subcommand("rate", "Ratings from a saved fit.json or multinomial.json");
    add_data_flags(rate, cfg, true);
    add_sign_flag(rate, sign);
    rate->add_option("--model", cfg.model, "Saved model file")->required();
    rate->add_option("--rapm-scale", cfg.rapm_scale, "Multiplier for reported RAPM")
        ->capture_default_str();
    rate->add_flag("--merge-traded", cfg.merge_traded, "Also write ratings merged across teams");

    auto* validate = app.add_subcommand("validate", "External criteria for rating tables");
    validate->add_option("--ratings", cfg.ratings, "Rating CSV (repeatable)")->required();
    validate->add_option("--boxscore", cfg.boxscore, "Box-score CSV")->required();
    validate->add_option("--all-nba", cfg.all_nba, "All-NBA list, one player key per line");
    validate->add_option("--rating", rating, "Rating to evaluate: rapm, rapm_binomial, epts, wepts");
    validate->add_option("--top-n", cfg.top_n, "List size per side")->capture_default_str();
    validate->add_flag("--offense-only", cfg.offense_only, "Criterion 1 on offensive ratings only");
    add_sign_flag(validate, sign);
    validate->add_option("--out", cfg.out, "Output directory")->capture_default_str();

    auto* gof = app.add_subcommand("gof", "Goodness of fit of a saved multinomial model");
    add_data_flags(gof, cfg, true);
    gof->add_option("--model", cfg.model, "multinomial.json")->required();
    gof->add_option("--sims", cfg.sims, "Simulations")->capture_default_str();
    gof->add_option("--seed", cfg.seed, "Seed")->capture_default_str();

    auto* syn = app.add_subcommand("synth", "Generate a synthetic league with known effects");
    syn->add_option("--teams", synth.n_teams)->capture_default_str();
    syn->add_option("--players-per-team", synth.players_per_team)->capture_default_str();
    syn->add_option("--n-possessions", synth.n_possessions)->capture_default_str();
    syn->add_option("--sparsity", synth.sparsity, "Share of nonzero offensive effects")
        ->capture_default_str();
    syn->add_option("--defense-sparsity", synth.defense_sparsity)->capture_default_str();
    syn->add_option("--coef-min", synth.coef_min)->capture_default_str();
    syn->add_option("--coef-max", synth.coef_max)->capture_default_str();
    syn->add_option("--ltp-fraction", synth.ltp_fraction)->capture_default_str();
    syn->add_option("--seed", synth.seed)->capture_default_str();
    syn->add_option("--out", synth_out, "Output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInput;
    }

    try {
        cfg.family = family_from_string(family);
        cfg.metric = metric_from_string(metric);
        cfg.sign = sign_convention_from_string(sign);
        if (!rating.empty())
            cfg.rating = rating_kind_from_string(rating);
        if (*ingest)
            return cmd_ingest(cfg, out, err);
        if (*fit)
            return cmd_fit(cfg, out, err);
        if (*multi)
            return cmd_multinomial(cfg, out, err);
        if (*rate)
            return cmd_rate(cfg, out, err);
        if (*validate)
            return cmd_validate(cfg, out, err);
        if (*gof)
            return cmd_gof(cfg, out, err);
        if (*syn)
            return cmd_synth(synth, synth_out, out, err);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kInput;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kInput;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kNumerical;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kInput;
    }
    return kInput;
}

} // namespace rapm::cli
