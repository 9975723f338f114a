#include "auctionfda/commands.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "auctionfda/auction_data.hpp"
#include "auctionfda/error.hpp"
#include "auctionfda/funcreg.hpp"
#include "auctionfda/io.hpp"
#include "auctionfda/pipeline.hpp"
#include "auctionfda/report.hpp"
#include "auctionfda/rng.hpp"
#include "auctionfda/synthgen.hpp"

namespace auctionfda::cli {

namespace {

constexpr int kMaxDegree = 10;
constexpr int kMaxKnots = 50;
constexpr std::size_t kMaxGrid = 100000;

std::vector<std::pair<std::string, std::string>> flag_pairs(const RunConfig& c) {
    std::vector<std::pair<std::string, std::string>> f;
    auto real = [](double v) { return io::format_real(v); };
    f.emplace_back("--grid", std::to_string(c.grid));
    f.emplace_back("--degree", std::to_string(c.degree));
    f.emplace_back("--knots", std::to_string(c.knots));
    f.emplace_back("--penalty-order", std::to_string(c.penalty_order));
    f.emplace_back("--lambda", real(c.lambda));
    f.emplace_back("--response", c.response == ResponseScale::fraction_of_final ? "fraction" : "logprice");
    f.emplace_back("--interp", std::string(to_string(c.interp)));
    f.emplace_back("--monotone", c.monotone ? "true" : "false");
    f.emplace_back("--alpha", real(c.alpha));
    f.emplace_back("--outlier-sd", c.outlier_sd ? real(*c.outlier_sd) : "none");
    f.emplace_back("--seed", c.seed ? std::to_string(*c.seed) : "none");
    f.emplace_back("--acceleration", c.acceleration ? "true" : "false");
    f.emplace_back("--log1p-history", c.log1p_history ? "true" : "false");
    std::string ps;
    for (int p : c.p_values) ps += (ps.empty() ? "" : ",") + std::to_string(p);
    std::string ls;
    for (double l : c.lambda_values) ls += (ls.empty() ? "" : ",") + real(l);
    f.emplace_back("--p-values", ps.empty() ? "default" : ps);
    f.emplace_back("--lambda-values", ls.empty() ? "default" : ls);
    return f;
}

SplineConfig spline_config(const RunConfig& c) {
    return SplineConfig::equally_spaced(c.degree, c.knots, c.penalty_order, c.lambda);
}

AnalysisOptions analysis_options(const RunConfig& c) {
    AnalysisOptions o{Grid(c.grid), {}, spline_config(c), {}, {}};
    o.prep.response = c.response;
    o.prep.space = c.interp;
    o.smooth.monotone = c.monotone;
    o.covariates.log1p_history = c.log1p_history;
    return o;
}

report::Metadata metadata(const RunConfig& c) {
    report::Metadata m;
    m.command = c.subcommand;
    m.flags = flag_pairs(c);
    return m;
}

void require(const std::filesystem::path& p, const char* flag) {
    if (p.empty()) throw ValidationError(std::string(flag) + " is required");
}

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + (dir / name).string());
    return out;
}

struct Inputs {
    std::vector<Lot> lots;
    BidHistory bids;
};

Inputs load(const RunConfig& c, report::Metadata& meta) {
    require(c.lots, "--lots");
    require(c.bids, "--bids");
    Inputs in;
    in.lots = parse_lot_catalog(c.lots);
    in.bids = parse_bid_history(c.bids, in.lots);
    attach_bid_counts(in.lots, in.bids);
    meta.add_input(c.lots);
    meta.add_input(c.bids);
    return in;
}

void report_messages(std::ostream& log, const std::vector<std::string>& messages, const char* prefix) {
    for (const auto& m : messages) log << prefix << m << '\n';
}

std::string file_safe(std::string name) {
    for (char& ch : name) {
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '-') ch = '_';
    }
    return name;
}

}  // namespace

void validate(const RunConfig& c) {
    if (c.grid < 2 || c.grid > kMaxGrid) throw ValidationError("--grid must lie in [2, " + std::to_string(kMaxGrid) + "]");
    if (c.degree < 1 || c.degree > kMaxDegree) {
        throw ValidationError("--degree must lie in [1, " + std::to_string(kMaxDegree) + "]");
    }
    if (c.knots < 0 || c.knots > kMaxKnots) throw ValidationError("--knots must lie in [0, " + std::to_string(kMaxKnots) + "]");
    if (c.penalty_order < 1 || c.penalty_order > c.degree) {
        throw ValidationError("--penalty-order must lie in [1, degree]");
    }
    if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda)) throw ValidationError("--lambda must be finite and >= 0");
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ValidationError("--alpha must lie in (0, 1)");
    if (c.outlier_sd && !(*c.outlier_sd > 0.0 && std::isfinite(*c.outlier_sd))) {
        throw ValidationError("--outlier-sd must be positive");
    }
    for (int p : c.p_values) {
        if (p < 1 || p > kMaxDegree || p < c.penalty_order) {
            throw ValidationError("--p-values entries must lie in [penalty order, " + std::to_string(kMaxDegree) + "]");
        }
    }
    for (double l : c.lambda_values) {
        if (!(l >= 0.0) || !std::isfinite(l)) throw ValidationError("--lambda-values entries must be finite and >= 0");
    }
}

std::string flag_echo(const RunConfig& config) {
    std::string out;
    for (const auto& [flag, value] : flag_pairs(config)) out += (out.empty() ? "" : " ") + flag + " " + value;
    return out;
}

int run_simulate(const RunConfig& c, std::ostream& log) {
    report::Metadata meta = metadata(c);
    TruthSpec spec = TruthSpec::defaults();
    if (!c.spec.empty()) {
        spec = truth_spec_from_json(io::read_file(c.spec));
        meta.add_input(c.spec);
    }
    if (c.seed) spec.seed = *c.seed;
    spec.validate();
    const SyntheticDataset data = gen_dataset(spec);
    meta.notes.emplace_back("rng", std::string(CounterRng::kAlgorithm) + " seed=" + std::to_string(spec.seed));
    meta.notes.emplace_back("n_lots", std::to_string(data.lots.size()));
    {
        auto out = open_output(c.out, "lots.csv");
        out << meta.block();
        write_lot_catalog(out, data.lots, TimeFormat::iso8601);
    }
    {
        auto out = open_output(c.out, "bids.csv");
        out << meta.block();
        write_bid_history(out, data.bids);
    }
    {
        auto out = open_output(c.out, "truth.json");
        out << truth_record_json(data);
    }
    log << "simulated " << data.lots.size() << " lots, " << data.bids.total_bids() << " bids into "
        << c.out.string() << '\n';
    return kSuccess;
}

int run_smooth(const RunConfig& c, std::ostream& log) {
    report::Metadata meta = metadata(c);
    Inputs in = load(c, meta);
    report_messages(log, in.bids.warnings, "warning: ");
    const AnalysisOptions options = analysis_options(c);
    const ObservationSet obs = build_observations(in.lots, in.bids, options);
    report_messages(log, obs.warnings, "warning: ");
    report_messages(log, obs.failures, "error: ");

    std::vector<PriceCurve> curves;
    for (const auto& o : obs.observations) curves.push_back(o.curve);
    meta.notes.emplace_back("n_lots", std::to_string(curves.size()));
    {
        auto out = open_output(c.out, "curves.csv");
        report::write_curves_csv(out, meta, curves);
    }
    {
        auto out = open_output(c.out, "curves.svg");
        out << report::curves_svg(curves, "Smoothed price curves (" + std::to_string(curves.size()) + " lots)");
    }
    log << "smoothed " << curves.size() << " of " << in.lots.size() << " lots\n";
    return obs.failures.empty() ? kSuccess : kPartialFailure;
}

int run_regress(const RunConfig& c, std::ostream& log) {
    report::Metadata meta = metadata(c);
    Inputs in = load(c, meta);
    report_messages(log, in.bids.warnings, "warning: ");
    const AnalysisOptions options = analysis_options(c);

    std::vector<Lot> lots = in.lots;
    if (c.outlier_sd) {
        OutlierScreen screen = filter_outliers(lots, *c.outlier_sd, options.covariates);
        std::string removed;
        for (const auto& id : screen.removed_ids) removed += (removed.empty() ? "" : " ") + id;
        log << "outlier screen removed " << screen.removed_ids.size() << " lots" << (removed.empty() ? "" : ": ")
            << removed << '\n';
        meta.notes.emplace_back("outliers_removed", removed.empty() ? "none" : removed);
        lots = std::move(screen.kept);
    }

    ObservationSet obs;
    if (!c.curves.empty()) {
        const auto samples = report::read_curves_csv(c.curves);
        meta.add_input(c.curves);
        obs = build_observations(lots, in.bids, samples, options);
    } else {
        obs = build_observations(lots, in.bids, options);
    }
    report_messages(log, obs.warnings, "warning: ");
    report_messages(log, obs.failures, "error: ");

    std::vector<ResponseKind> kinds{ResponseKind::level, ResponseKind::velocity};
    if (c.acceleration) kinds.push_back(ResponseKind::acceleration);
    std::vector<RegressionResult> results;
    for (ResponseKind kind : kinds) {
        results.push_back(coefficient_curves(obs.observations, kind, c.alpha));
        report_messages(log, results.back().warnings, "warning: ");
    }

    meta.notes.emplace_back("alpha", io::format_real(c.alpha));
    meta.notes.emplace_back("n_lots", std::to_string(obs.observations.size()));
    meta.notes.emplace_back("dof", std::to_string(results.front().dof));
    {
        auto out = open_output(c.out, "coefficients.csv");
        report::write_coefficients_csv(out, meta, results);
    }
    const auto& names = covariate_names();
    for (std::size_t k = 0; k < names.size(); ++k) {
        auto out = open_output(c.out, "beta_" + file_safe(names[k]) + ".svg");
        out << report::coefficient_svg(results, k);
    }
    log << "regressed " << obs.observations.size() << " lots (N = " << obs.observations.size() << ")\n";
    return obs.failures.empty() ? kSuccess : kPartialFailure;
}

int run_sensitivity(const RunConfig& c, std::ostream& log) {
    report::Metadata meta = metadata(c);
    Inputs in = load(c, meta);
    report_messages(log, in.bids.warnings, "warning: ");
    const AnalysisOptions options = analysis_options(c);

    std::vector<ResponseVector> responses;
    bool partial = false;
    for (const auto& lot : in.lots) {
        const auto bids = in.bids.bids_for(lot.lot_id);
        if (bids.empty()) {
            log << "warning: lot " << lot.lot_id << " has no bids; skipped\n";
            continue;
        }
        try {
            responses.push_back(prepare_response(lot, bids, options.grid, options.prep));
        } catch (const std::exception& e) {
            log << "error: lot " << lot.lot_id << ": " << e.what() << '\n';
            partial = true;
        }
    }
    const std::vector<int> degrees = c.p_values.empty() ? default_degree_grid() : c.p_values;
    const std::vector<double> lambdas = c.lambda_values.empty() ? default_lambda_grid() : c.lambda_values;
    const SensitivityTable table = lambda_sensitivity(responses, options.grid, options.spline, degrees, lambdas);
    for (const auto& cell : table.cells) {
        if (!cell.rmse) {
            partial = true;
            log << "error: p=" << cell.degree << " lambda=" << io::format_real(cell.lambda) << ": " << cell.note << '\n';
        }
    }
    meta.notes.emplace_back("n_lots", std::to_string(responses.size()));
    {
        auto out = open_output(c.out, "sensitivity.csv");
        report::write_sensitivity_csv(out, meta, table);
    }
    if (table.best) {
        const auto& best = table.cells[*table.best];
        log << "minimum RMSE " << io::format_real(*best.rmse) << " at p=" << best.degree
            << " lambda=" << io::format_real(best.lambda) << '\n';
    }
    return partial ? kPartialFailure : kSuccess;
}

int run(const RunConfig& config, std::ostream& log) {
    try {
        validate(config);
        if (config.subcommand == "simulate") return run_simulate(config, log);
        if (config.subcommand == "smooth") return run_smooth(config, log);
        if (config.subcommand == "regress") return run_regress(config, log);
        if (config.subcommand == "sensitivity") return run_sensitivity(config, log);
        log << "error: unknown subcommand '" << config.subcommand << "'\n";
        return kInvalidInput;
    } catch (const EstimabilityError& e) {
        log << "error: " << e.what() << '\n';
        if (!e.collinear_columns().empty()) {
            log << "collinear columns:";
            for (const auto& col : e.collinear_columns()) log << ' ' << col;
            log << '\n';
        }
        return kInvalidInput;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return kInvalidInput;
    }
}

}  // namespace auctionfda::cli
