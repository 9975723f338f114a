#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "auctionfda/auction_data.hpp"
#include "auctionfda/commands.hpp"
#include "auctionfda/curve_prep.hpp"
#include "auctionfda/error.hpp"
#include "auctionfda/funcreg.hpp"
#include "auctionfda/pipeline.hpp"
#include "auctionfda/pspline.hpp"
#include "auctionfda/report.hpp"
#include "auctionfda/synthgen.hpp"

namespace py = pybind11;
using namespace auctionfda;

namespace {

AnalysisOptions make_options(std::size_t grid, int degree, int knots, int penalty_order, double lambda,
                             const std::string& response, const std::string& interp, bool monotone) {
    AnalysisOptions o{Grid(grid), {}, SplineConfig::equally_spaced(degree, knots, penalty_order, lambda), {}, {}};
    o.prep.response = parse_response_scale(response);
    o.prep.space = parse_interpolation_space(interp);
    o.smooth.monotone = monotone;
    return o;
}

py::dict lot_dict(const Lot& l) {
    py::dict d;
    d["lot_id"] = l.lot_id;
    d["artist_id"] = l.artist_id;
    d["artist_type"] = std::string(to_string(l.artist_type));
    d["opening_bid"] = l.opening_bid.major();
    d["low_estimate"] = l.low_estimate.major();
    d["high_estimate"] = l.high_estimate.major();
    d["position_group"] = l.position_group;
    d["length_in"] = l.length_in;
    d["width_in"] = l.width_in;
    d["medium"] = std::string(to_string(l.medium));
    d["prev_price_per_sqin"] = l.prev_price_per_sqin ? py::cast(*l.prev_price_per_sqin) : py::none();
    d["prev_lots_sold"] = l.prev_lots_sold;
    d["realized_price"] = l.realized_price ? py::cast(l.realized_price->major()) : py::none();
    d["auction_open"] = l.auction_open;
    d["auction_close"] = l.auction_close;
    d["n_bids"] = l.n_bids;
    return d;
}

}  // namespace

PYBIND11_MODULE(_auctionfda, m) {
    m.doc() = "Penalized spline price curves and pointwise functional regression";
    m.attr("__version__") = AUCTIONFDA_VERSION;

    // translators run most recent first, so the base class goes in first
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<SingularSystemError>(m, "SingularSystemError", PyExc_ArithmeticError);
    py::register_exception<EstimabilityError>(m, "EstimabilityError", PyExc_ArithmeticError);
    py::register_exception<MonotoneFitError>(m, "MonotoneFitError", PyExc_RuntimeError);

    py::class_<SplineConfig>(m, "SplineConfig")
        .def(py::init([](int degree, int knots, int penalty_order, double lambda_) {
                 auto c = SplineConfig::equally_spaced(degree, knots, penalty_order, lambda_);
                 c.validate();
                 return c;
             }),
             py::arg("degree") = 4, py::arg("knots") = SplineConfig::kDefaultKnots, py::arg("penalty_order") = 2,
             py::arg("lambda_") = 0.1)
        .def_readwrite("degree", &SplineConfig::degree)
        .def_readwrite("knots", &SplineConfig::knots)
        .def_readwrite("penalty_order", &SplineConfig::penalty_order)
        .def_readwrite("lambda_", &SplineConfig::lambda)
        .def_property_readonly("basis_size", &SplineConfig::basis_size)
        .def("__repr__", [](const SplineConfig& c) {
            std::ostringstream s;
            s << "SplineConfig(degree=" << c.degree << ", knots=" << c.knots.size() << ", penalty_order="
              << c.penalty_order << ", lambda_=" << c.lambda << ")";
            return s.str();
        });

    py::class_<SplineFit>(m, "SplineFit")
        .def_readonly("config", &SplineFit::config)
        .def_readonly("coeffs", &SplineFit::coeffs)
        .def_readonly("residual_ss", &SplineFit::residual_ss)
        .def_readonly("penalty_value", &SplineFit::penalty_value)
        .def_readonly("penss", &SplineFit::penss)
        .def_readonly("ridge_fallback", &SplineFit::ridge_fallback)
        .def("__call__", [](const SplineFit& f, double t, int deriv) { return evaluate(f, t, deriv); },
             py::arg("t"), py::arg("deriv") = 0);

    m.def("grid", [](std::size_t n) { const Grid g(n); return std::vector<double>(g.points().begin(), g.points().end()); },
          py::arg("n") = Grid::kDefaultSize, "Equally spaced points on [0, 1].");
    m.def("basis_matrix", [](std::size_t n, const SplineConfig& c) { return basis_matrix(Grid(n), c); },
          py::arg("n"), py::arg("config"));
    m.def("penalty_gram", &penalty_gram, py::arg("config"));
    m.def("fit",
          [](const std::vector<double>& y, const SplineConfig& c, bool monotone) {
              const Grid grid(y.size());
              return monotone ? fit_monotone(y, grid, c) : fit(std::span<const double>(y), grid, c);
          },
          py::arg("y"), py::arg("config"), py::arg("monotone") = false,
          "Penalized spline fit to values on the equally spaced grid of len(y) points.");
    m.def("evaluate", &evaluate, py::arg("fit"), py::arg("t"), py::arg("deriv") = 0);
    m.def("penss", [](const std::vector<double>& y, const SplineConfig& c, const Eigen::VectorXd& coeffs) {
        return penss(y, Grid(y.size()), c, coeffs);
    }, py::arg("y"), py::arg("config"), py::arg("coeffs"));

    m.def("read_lots", [](const std::filesystem::path& p) {
        py::list out;
        for (const auto& l : parse_lot_catalog(p)) out.append(lot_dict(l));
        return out;
    }, py::arg("path"));

    m.def("read_bids", [](const std::filesystem::path& bids, const std::filesystem::path& lots) {
        const auto catalog = parse_lot_catalog(lots);
        const auto history = parse_bid_history(bids, catalog);
        py::dict out;
        for (const auto& [id, records] : history.by_lot) {
            py::list rows;
            for (const auto& r : records) rows.append(py::make_tuple(r.bidder_id, r.timestamp, r.amount.major()));
            out[py::str(id)] = rows;
        }
        return out;
    }, py::arg("bids"), py::arg("lots"), "Bids per lot as (bidder_id, seconds_since_open, amount).");

    m.def("smooth",
          [](const std::filesystem::path& lots_path, const std::filesystem::path& bids_path, std::size_t grid,
             int degree, int knots, int penalty_order, double lambda_, const std::string& response,
             const std::string& interp, bool monotone) {
              const auto lots = parse_lot_catalog(lots_path);
              const auto bids = parse_bid_history(bids_path, lots);
              const auto options = make_options(grid, degree, knots, penalty_order, lambda_, response, interp, monotone);
              const ObservationSet obs = build_observations(lots, bids, options);
              py::dict curves;
              for (const auto& o : obs.observations) {
                  py::dict c;
                  c["values"] = o.curve.values;
                  c["velocity"] = o.curve.velocity;
                  c["acceleration"] = o.curve.acceleration;
                  c["log_bidders"] = o.covariates.log_bidders;
                  curves[py::str(o.lot_id)] = c;
              }
              py::dict out;
              out["curves"] = curves;
              out["warnings"] = obs.warnings;
              out["failures"] = obs.failures;
              return out;
          },
          py::arg("lots"), py::arg("bids"), py::arg("grid") = 100, py::arg("degree") = 4, py::arg("knots") = 10,
          py::arg("penalty_order") = 2, py::arg("lambda_") = 0.1, py::arg("response") = "fraction",
          py::arg("interp") = "log", py::arg("monotone") = false);

    py::class_<CoefficientCurve>(m, "CoefficientCurve")
        .def_readonly("covariate", &CoefficientCurve::covariate)
        .def_readonly("beta", &CoefficientCurve::beta)
        .def_readonly("se", &CoefficientCurve::se)
        .def_readonly("ci_lo", &CoefficientCurve::ci_lo)
        .def_readonly("ci_hi", &CoefficientCurve::ci_hi)
        .def_readonly("significant", &CoefficientCurve::significant);

    py::class_<RegressionResult>(m, "RegressionResult")
        .def_property_readonly("kind", [](const RegressionResult& r) { return std::string(to_string(r.kind)); })
        .def_readonly("alpha", &RegressionResult::alpha)
        .def_readonly("n_lots", &RegressionResult::n_lots)
        .def_readonly("dof", &RegressionResult::dof)
        .def_readonly("curves", &RegressionResult::curves)
        .def_readonly("condition_numbers", &RegressionResult::condition_numbers)
        .def_readonly("warnings", &RegressionResult::warnings)
        .def("curve", [](const RegressionResult& r, const std::string& name) { return r.curves.at(covariate_index(name)); });

    m.attr("covariate_names") = covariate_names();
    m.def("t_critical", &t_critical, py::arg("alpha"), py::arg("dof"));

    m.def("regress",
          [](const std::filesystem::path& lots_path, const std::filesystem::path& bids_path, const std::string& kind,
             double alpha, std::optional<double> outlier_sd, std::size_t grid, int degree, int knots,
             int penalty_order, double lambda_, const std::string& response, bool log1p_history) {
              auto lots = parse_lot_catalog(lots_path);
              const auto bids = parse_bid_history(bids_path, lots);
              auto options = make_options(grid, degree, knots, penalty_order, lambda_, response, "log", false);
              options.covariates.log1p_history = log1p_history;
              if (outlier_sd) lots = filter_outliers(lots, *outlier_sd, options.covariates).kept;
              const ObservationSet obs = build_observations(lots, bids, options);
              return coefficient_curves(obs.observations, parse_response_kind(kind), alpha);
          },
          py::arg("lots"), py::arg("bids"), py::arg("kind") = "level", py::arg("alpha") = 0.05,
          py::arg("outlier_sd") = py::none(), py::arg("grid") = 100, py::arg("degree") = 4, py::arg("knots") = 10,
          py::arg("penalty_order") = 2, py::arg("lambda_") = 0.1, py::arg("response") = "fraction",
          py::arg("log1p_history") = false);

    m.def("default_truth_spec", [] { return to_json(TruthSpec::defaults()); },
          "Default synthetic truth spec as JSON text.");
    m.def("simulate",
          [](const std::filesystem::path& out, std::optional<std::uint64_t> seed, const std::string& spec_json) {
              TruthSpec spec = spec_json.empty() ? TruthSpec::defaults() : truth_spec_from_json(spec_json);
              if (seed) spec.seed = *seed;
              const SyntheticDataset data = gen_dataset(spec);
              write_dataset(data, out);
              return data.lots.size();
          },
          py::arg("out"), py::arg("seed") = py::none(), py::arg("spec_json") = "",
          "Writes lots.csv, bids.csv and truth.json; returns the lot count.");

    m.def("coverage",
          [](const std::string& spec_json, std::size_t reps, double alpha, std::size_t grid) {
              TruthSpec spec = spec_json.empty() ? TruthSpec::defaults() : truth_spec_from_json(spec_json);
              CoverageOptions o;
              o.reps = reps;
              o.alpha = alpha;
              o.grid_size = grid;
              const CoverageReport r = coverage_experiment(spec, o);
              py::dict out;
              for (std::size_t i = 0; i < r.covariates.size(); ++i) {
                  out[py::str(r.covariates[i])] = py::make_tuple(r.coverage[i], r.mc_se[i], r.significance[i]);
              }
              return out;
          },
          py::arg("spec_json") = "", py::arg("reps") = 100, py::arg("alpha") = 0.05, py::arg("grid") = 100,
          "Per covariate: (coverage, Monte Carlo SE, fraction significant).");

    m.def("run_cli",
          [](const cli::RunConfig& config) {
              std::ostringstream log;
              const int code = cli::run(config, log);
              return py::make_tuple(code, log.str());
          },
          py::arg("config"));

    py::class_<cli::RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("subcommand", &cli::RunConfig::subcommand)
        .def_readwrite("lots", &cli::RunConfig::lots)
        .def_readwrite("bids", &cli::RunConfig::bids)
        .def_readwrite("curves", &cli::RunConfig::curves)
        .def_readwrite("spec", &cli::RunConfig::spec)
        .def_readwrite("out", &cli::RunConfig::out)
        .def_readwrite("grid", &cli::RunConfig::grid)
        .def_readwrite("degree", &cli::RunConfig::degree)
        .def_readwrite("knots", &cli::RunConfig::knots)
        .def_readwrite("penalty_order", &cli::RunConfig::penalty_order)
        .def_readwrite("lambda_", &cli::RunConfig::lambda)
        .def_readwrite("monotone", &cli::RunConfig::monotone)
        .def_readwrite("alpha", &cli::RunConfig::alpha)
        .def_readwrite("outlier_sd", &cli::RunConfig::outlier_sd)
        .def_readwrite("seed", &cli::RunConfig::seed)
        .def_readwrite("acceleration", &cli::RunConfig::acceleration)
        .def_readwrite("log1p_history", &cli::RunConfig::log1p_history)
        .def_readwrite("p_values", &cli::RunConfig::p_values)
        .def_readwrite("lambda_values", &cli::RunConfig::lambda_values)
        .def_property(
            "response",
            [](const cli::RunConfig& c) { return c.response == ResponseScale::log_price ? "logprice" : "fraction"; },
            [](cli::RunConfig& c, const std::string& v) { c.response = parse_response_scale(v); })
        .def_property(
            "interp", [](const cli::RunConfig& c) { return std::string(to_string(c.interp)); },
            [](cli::RunConfig& c, const std::string& v) { c.interp = parse_interpolation_space(v); });
}
