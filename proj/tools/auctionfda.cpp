// auctionfda command-line front end.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "auctionfda/commands.hpp"
#include "auctionfda/curve_prep.hpp"

namespace {

using auctionfda::cli::RunConfig;

std::string interp = "log";
std::string response = "fraction";

void add_spline_flags(CLI::App* app, RunConfig& c) {
    app->add_option("--grid", c.grid, "grid size n");
    app->add_option("--degree", c.degree, "spline degree p");
    app->add_option("--knots", c.knots, "number of equally spaced interior knots L");
    app->add_option("--penalty-order", c.penalty_order, "penalty derivative order m");
    app->add_option("--lambda", c.lambda, "smoothing parameter");
    app->add_option("--interp", interp, "interpolate log amounts or raw amounts")
        ->check(CLI::IsMember({"log", "raw"}));
    app->add_option("--response", response, "fraction | logprice")->check(CLI::IsMember({"fraction", "logprice"}));
    app->add_flag("--monotone", c.monotone, "constrain fitted curves to be non-decreasing");
    app->add_flag("--log1p-history", c.log1p_history, "use log(1 + x) for prior price per square inch");
}

void add_io_flags(CLI::App* app, RunConfig& c) {
    app->add_option("--lots", c.lots, "lot catalog CSV")->required();
    app->add_option("--bids", c.bids, "bid history CSV")->required();
    app->add_option("--out", c.out, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Price curves and functional regression for online auctions"};
    app.set_version_flag("--version", std::string(AUCTIONFDA_VERSION));
    app.require_subcommand(1);

    RunConfig c;
    std::uint64_t seed = 0;

    auto* simulate = app.add_subcommand("simulate", "generate a synthetic auction dataset");
    simulate->add_option("--spec", c.spec, "truth spec JSON");
    simulate->add_option("--seed", seed, "64-bit seed");
    simulate->add_option("--out", c.out, "output directory");

    auto* smooth = app.add_subcommand("smooth", "fit price curves and write curves.csv and curves.svg");
    add_io_flags(smooth, c);
    add_spline_flags(smooth, c);

    auto* regress = app.add_subcommand("regress", "pointwise regression of curves on lot covariates");
    add_io_flags(regress, c);
    add_spline_flags(regress, c);
    regress->add_option("--curves", c.curves, "pre-smoothed curves.csv");
    regress->add_option("--alpha", c.alpha, "band level");
    double outlier_sd = 0.0;
    regress->add_option("--outlier-sd", outlier_sd, "drop lots further than k sample SDs out");
    regress->add_flag("--acceleration", c.acceleration, "also regress acceleration curves");

    auto* sensitivity = app.add_subcommand("sensitivity", "RMSE over a (degree, lambda) sweep");
    add_io_flags(sensitivity, c);
    add_spline_flags(sensitivity, c);
    sensitivity->add_option("--p-values", c.p_values, "degrees to sweep")->delimiter(',');
    sensitivity->add_option("--lambda-values", c.lambda_values, "smoothing parameters to sweep")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return auctionfda::cli::kInvalidInput;
    }

    c.subcommand = app.get_subcommands().front()->get_name();
    c.interp = auctionfda::parse_interpolation_space(interp);
    c.response = auctionfda::parse_response_scale(response);
    if (simulate->count("--seed")) c.seed = seed;
    if (regress->count("--outlier-sd")) c.outlier_sd = outlier_sd;
    return auctionfda::cli::run(c, std::cerr);
}
