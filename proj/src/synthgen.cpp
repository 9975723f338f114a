#include "auctionfda/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "auctionfda/error.hpp"
#include "auctionfda/io.hpp"
#include "auctionfda/parallel.hpp"
#include "auctionfda/pipeline.hpp"
#include "auctionfda/rng.hpp"

namespace auctionfda {

using nlohmann::json;

PiecewiseLinear PiecewiseLinear::constant(double value) { return PiecewiseLinear{{{0.0, value}}}; }

PiecewiseLinear PiecewiseLinear::line(double at_zero, double at_one) {
    return PiecewiseLinear{{{0.0, at_zero}, {1.0, at_one}}};
}

double PiecewiseLinear::operator()(double t) const {
    if (points.empty()) return 0.0;
    if (t <= points.front().first) return points.front().second;
    if (t >= points.back().first) return points.back().second;
    auto hi = std::upper_bound(points.begin(), points.end(), t,
                               [](double v, const auto& p) { return v < p.first; });
    auto lo = hi - 1;
    const double w = (t - lo->first) / (hi->first - lo->first);
    return lo->second + w * (hi->second - lo->second);
}

double BidIntensity::rate(double t) const {
    const double u = 2.0 * t - 1.0;
    return mean_bids * (1.0 + edge_weight * u * u) / (1.0 + edge_weight / 3.0);
}

double BidIntensity::peak() const { return std::max(rate(0.0), rate(0.5)); }

TruthSpec TruthSpec::defaults() {
    TruthSpec s;
    s.beta_curves["intercept"] = PiecewiseLinear::line(-4.0, 9.5);
    s.beta_curves["log_prev_price_sqin"] = PiecewiseLinear::constant(0.3);
    s.beta_curves["established"] = PiecewiseLinear::line(0.3, 0.0);
    s.beta_curves["emerging"] = PiecewiseLinear::line(-0.3, 0.0);
    s.beta_curves["log_opening_bid"] = PiecewiseLinear::line(1.0, 0.0);
    s.beta_curves["log_position_group"] = PiecewiseLinear::constant(-0.2);
    s.beta_curves["log_area"] = PiecewiseLinear::line(-0.1, 0.0);
    return s;
}

void TruthSpec::validate() const {
    if (n_lots < kDesignColumns + 1) {
        throw ValidationError("n_lots must be at least " + std::to_string(kDesignColumns + 1) + ", got " +
                              std::to_string(n_lots));
    }
    if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) throw ValidationError("noise_sd must be >= 0");
    if (!(obs_noise_sd >= 0.0) || !std::isfinite(obs_noise_sd)) throw ValidationError("obs_noise_sd must be >= 0");
    if (!(intensity.mean_bids > generating::kBiddersPerLot.mean) || !std::isfinite(intensity.mean_bids)) {
        throw ValidationError("intensity.mean_bids must exceed the mean bidder count " +
                              io::format_real(generating::kBiddersPerLot.mean));
    }
    if (!(intensity.sd_bids >= 0.0) || !std::isfinite(intensity.sd_bids)) {
        throw ValidationError("intensity.sd_bids must be >= 0");
    }
    if (!(intensity.edge_weight >= 0.0)) throw ValidationError("intensity.edge_weight must be >= 0");
    if (planted_outliers > n_lots) throw ValidationError("planted_outliers exceeds n_lots");
    if (!(covariate_truncation_sd == 0.0 || covariate_truncation_sd >= 0.5)) {
        throw ValidationError("covariate_truncation_sd must be 0 (off) or at least 0.5");
    }
    const auto& names = covariate_names();
    for (const auto& [name, curve] : beta_curves) {
        if (std::find(names.begin(), names.end(), name) == names.end()) {
            throw ValidationError("beta curve for unknown covariate '" + name + "'");
        }
        if (curve.points.empty()) throw ValidationError("beta curve '" + name + "' has no control points");
        for (std::size_t i = 0; i < curve.points.size(); ++i) {
            const auto& [t, v] = curve.points[i];
            if (!std::isfinite(t) || !std::isfinite(v)) {
                throw ValidationError("beta curve '" + name + "' has a non-finite control point");
            }
            if (i > 0 && !(t > curve.points[i - 1].first)) {
                throw ValidationError("beta curve '" + name + "' control points must increase in t");
            }
        }
    }
}

double TruthSpec::beta(std::size_t covariate, double t) const {
    auto it = beta_curves.find(covariate_names().at(covariate));
    return it == beta_curves.end() ? 0.0 : it->second(t);
}

namespace {

// Marsaglia-Tsang; shape < 1 is boosted through U^(1/shape).
double gamma_draw(CounterRng& rng, double shape) {
    if (shape < 1.0) return gamma_draw(rng, shape + 1.0) * std::pow(rng.uniform_pos(), 1.0 / shape);
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
        double x = 0.0;
        double v = 0.0;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform_pos();
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
}

// Inversion by sequential search; rates here stay well below 100.
int poisson_draw(CounterRng& rng, double rate) {
    if (rate > 500.0) throw ValidationError("bid rate too large");
    const double u = rng.uniform();
    double p = std::exp(-rate);
    double cdf = p;
    int k = 0;
    while (u >= cdf && p > 0.0) {
        ++k;
        p *= rate / k;
        cdf += p;
    }
    return k;
}

constexpr double kOpenEpoch = 1102325400.0;  // 2004-12-06T09:30:00Z
constexpr double kBaseDuration = 3.0 * 86400.0;
constexpr double kGroupStagger = 1800.0;

struct LogNormal {
    double mu;
    double sigma;
};

LogNormal matched(GeneratingMoments m) {
    const double s2 = std::log1p((m.sd / m.mean) * (m.sd / m.mean));
    return {std::log(m.mean) - 0.5 * s2, std::sqrt(s2)};
}

double draw_z(CounterRng& rng, double truncation) {
    double z = rng.normal();
    if (truncation > 0.0) {
        while (std::abs(z) > truncation) z = rng.normal();
    }
    return z;
}

using BetaTable = std::array<const PiecewiseLinear*, kDesignColumns>;

BetaTable beta_table(const TruthSpec& spec) {
    BetaTable table{};
    const auto& names = covariate_names();
    for (std::size_t c = 0; c < kDesignColumns; ++c) {
        auto it = spec.beta_curves.find(names[c]);
        table[c] = it == spec.beta_curves.end() ? nullptr : &it->second;
    }
    return table;
}

struct LatentNoise {
    double z0 = 0.0;
    double z1 = 0.0;
};

double latent_value(const TruthSpec& spec, const BetaTable& beta, const std::vector<double>& x_static, double x8,
                    double t, const LatentNoise& noise) {
    double z = beta[0] ? (*beta[0])(t) : 0.0;
    for (std::size_t c = 0; c < kStaticCovariates; ++c) {
        if (beta[c + 1]) z += x_static[c] * (*beta[c + 1])(t);
    }
    if (beta[kDesignColumns - 1]) z += x8 * (*beta[kDesignColumns - 1])(t);
    return z + spec.noise_sd * (noise.z0 * (1.0 - t) + noise.z1 * t);
}

std::string padded(char prefix, std::size_t value, std::size_t width) {
    std::string digits = std::to_string(value);
    if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
    return prefix + digits;
}

struct GeneratedLot {
    Lot lot;
    std::vector<BidRecord> bids;
    LatentNoise noise;
};

GeneratedLot generate_lot(const TruthSpec& spec, const BetaTable& beta, std::size_t j) {
    namespace g = generating;
    CounterRng rng = CounterRng(spec.seed).split(j);
    const double trunc = spec.covariate_truncation_sd;
    const std::size_t width = std::max<std::size_t>(3, std::to_string(spec.n_lots).size());
    const bool outlier = j >= spec.n_lots - spec.planted_outliers;

    GeneratedLot out;
    Lot& lot = out.lot;
    lot.lot_id = padded('L', j + 1, width);
    lot.artist_id = padded('A', static_cast<std::size_t>(rng.uniform_int(1, 60)), 2);

    const double u_type = rng.uniform();
    lot.artist_type = u_type < g::kEstablishedShare                      ? ArtistType::established
                      : u_type < g::kEstablishedShare + g::kEmergingShare ? ArtistType::emerging
                                                                          : ArtistType::other;

    const LogNormal open_ln = matched(g::kOpeningBid);
    const double z_open = draw_z(rng, trunc);
    const double log_open = open_ln.mu + open_ln.sigma * (outlier ? 8.0 : z_open);
    const double opening = std::max(1.0, std::round(std::exp(log_open)));
    lot.opening_bid = Money::from_major(opening);
    const double ratio = 0.73 + 0.23 * rng.uniform();
    const double low = std::max(opening, std::ceil(opening / ratio / 10.0) * 10.0);
    lot.low_estimate = Money::from_major(low);
    lot.high_estimate = Money::from_major(std::round(low * (1.15 + 0.2 * rng.uniform())));

    lot.position_group = static_cast<int>(rng.uniform_int(1, g::kPositionGroups));

    const LogNormal area_ln = matched(g::kArea);
    const double area = std::exp(area_ln.mu + area_ln.sigma * draw_z(rng, trunc));
    const double aspect = std::exp(0.3 * rng.normal());
    lot.length_in = std::max(0.01, std::round(std::sqrt(area * aspect) * 100.0) / 100.0);
    lot.width_in = std::max(0.01, std::round(std::sqrt(area / aspect) * 100.0) / 100.0);
    lot.medium = rng.uniform() < g::kCanvasShare ? Medium::canvas : Medium::paper;

    const LogNormal price_ln = matched(g::kPrevPricePerSqin);
    const double prev = std::exp(price_ln.mu + price_ln.sigma * draw_z(rng, trunc));
    lot.prev_price_per_sqin = std::max(0.01, std::round(prev * 100.0) / 100.0);
    const LogNormal sold_ln = matched(g::kPrevLotsSold);
    lot.prev_lots_sold =
        std::max(1, static_cast<int>(std::lround(std::exp(sold_ln.mu + sold_ln.sigma * draw_z(rng, trunc)))));

    lot.auction_open = kOpenEpoch;
    lot.auction_close = kOpenEpoch + kBaseDuration + kGroupStagger * (lot.position_group - 1);

    out.noise.z0 = rng.normal();
    out.noise.z1 = rng.normal();

    // Distinct bidders: a rounded normal clamped to [2, 8]. The latent mean and
    // SD are solved so that the clamped draws have the declared mean and SD.
    constexpr double kBidderLatentMean = 3.9248796951855534;
    constexpr double kBidderLatentSd = 1.8798141810304283;
    const int pool_size =
        std::clamp(static_cast<int>(std::lround(kBidderLatentMean + kBidderLatentSd * rng.normal())), 2, 8);

    // bids beyond one per bidder: negative binomial as a gamma-Poisson mixture,
    // Poisson when the requested spread is too small for overdispersion
    const BidIntensity& intensity = spec.intensity;
    const double extra_mean = intensity.mean_bids - g::kBiddersPerLot.mean;
    const double extra_var = intensity.sd_bids * intensity.sd_bids - g::kBiddersPerLot.sd * g::kBiddersPerLot.sd;
    double extra_rate = extra_mean;
    if (extra_var > extra_mean) {
        const double shape = extra_mean * extra_mean / (extra_var - extra_mean);
        extra_rate = gamma_draw(rng, shape) * extra_mean / shape;
    }
    const auto n_bids = static_cast<std::size_t>(pool_size + poisson_draw(rng, extra_rate));

    const double peak = intensity.peak();
    std::vector<double> times;
    while (times.size() < n_bids) {
        const double t = rng.uniform();
        if (rng.uniform() * peak < intensity.rate(t)) times.push_back(t);
    }
    std::sort(times.begin(), times.end());

    std::vector<int> pool(g::kBidderPool);
    std::iota(pool.begin(), pool.end(), 1);
    for (int i = 0; i < pool_size; ++i) {
        std::swap(pool[static_cast<std::size_t>(i)],
                  pool[static_cast<std::size_t>(rng.uniform_int(i, g::kBidderPool - 1))]);
    }

    const std::vector<double> x_static = CovariateVector{
        std::log(*lot.prev_price_per_sqin),
        lot.artist_type == ArtistType::established ? 1.0 : 0.0,
        lot.artist_type == ArtistType::emerging ? 1.0 : 0.0,
        std::log(lot.opening_bid.major()),
        std::log(static_cast<double>(lot.position_group)),
        std::log(lot.area()),
        lot.medium == Medium::canvas ? 1.0 : 0.0,
        {},
        {}}.static_values();

    const double duration = lot.duration();
    std::set<int> seen;
    int previous = -1;
    double last_ts = -1.0;
    std::int64_t running = 0;
    std::vector<int> unseen(static_cast<std::size_t>(pool_size));
    std::iota(unseen.begin(), unseen.end(), 0);
    for (std::size_t k = 0; k < times.size(); ++k) {
        double ts = std::round(times[k] * duration * 1000.0) / 1000.0;
        if (ts <= last_ts) ts = std::round((last_ts + 0.001) * 1000.0) / 1000.0;
        if (ts > duration) break;
        int slot = 0;
        if (times.size() - k == unseen.size()) {
            // the remaining bids go to bidders who have not bid yet
            const auto pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(unseen.size()) - 1));
            slot = unseen[pick];
        } else if (previous < 0) {
            slot = static_cast<int>(rng.uniform_int(0, pool_size - 1));
        } else {
            slot = static_cast<int>(rng.uniform_int(0, pool_size - 2));
            if (slot >= previous) ++slot;
        }
        std::erase(unseen, slot);
        previous = slot;
        const int bidder = pool[static_cast<std::size_t>(slot)];
        seen.insert(bidder);
        const double tn = ts / duration;
        const double x8 = std::log(static_cast<double>(seen.size()));
        double z = latent_value(spec, beta, x_static, x8, tn, out.noise) + spec.obs_noise_sd * rng.normal();
        z = std::min(z, 35.0);
        const std::int64_t minor = std::max<std::int64_t>(1, std::llround(std::exp(z) * 100.0));
        running = std::max(running, minor);
        out.bids.push_back(BidRecord{lot.lot_id, padded('B', static_cast<std::size_t>(bidder), 3), ts,
                                     Money::from_minor(running)});
        last_ts = ts;
    }
    lot.n_bids = out.bids.size();
    lot.realized_price = out.bids.back().amount;
    return out;
}

std::vector<GeneratedLot> generate_all(const TruthSpec& spec) {
    spec.validate();
    const BetaTable beta = beta_table(spec);
    std::vector<GeneratedLot> lots(spec.n_lots);
    parallel_for(spec.n_lots, [&](std::size_t j) { lots[j] = generate_lot(spec, beta, j); });
    return lots;
}

json curve_json(const PiecewiseLinear& curve) {
    json points = json::array();
    for (const auto& [t, v] : curve.points) points.push_back(json::array({t, v}));
    return points;
}

json spec_json(const TruthSpec& spec) {
    json j;
    j["n_lots"] = spec.n_lots;
    j["seed"] = spec.seed;
    j["noise_sd"] = spec.noise_sd;
    j["obs_noise_sd"] = spec.obs_noise_sd;
    j["planted_outliers"] = spec.planted_outliers;
    j["covariate_truncation_sd"] = spec.covariate_truncation_sd;
    j["intensity"] = {{"mean_bids", spec.intensity.mean_bids},
                      {"edge_weight", spec.intensity.edge_weight},
                      {"sd_bids", spec.intensity.sd_bids}};
    json curves = json::object();
    for (const auto& [name, curve] : spec.beta_curves) curves[name] = curve_json(curve);
    j["beta_curves"] = curves;
    return j;
}

}  // namespace

SyntheticDataset gen_dataset(const TruthSpec& spec) {
    auto generated = generate_all(spec);
    SyntheticDataset data;
    data.spec = spec;
    data.bids.time_format = TimeFormat::seconds;
    for (auto& g : generated) {
        data.bids.by_lot[g.lot.lot_id] = std::move(g.bids);
        data.lots.push_back(std::move(g.lot));
    }
    return data;
}

std::string to_json(const TruthSpec& spec) { return spec_json(spec).dump(2); }

TruthSpec truth_spec_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("spec is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("spec must be a JSON object");
    TruthSpec spec = TruthSpec::defaults();
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "n_lots") {
                const auto n = value.get<long long>();
                if (n < 0) throw ValidationError("n_lots must be non-negative");
                spec.n_lots = static_cast<std::size_t>(n);
            } else if (key == "seed") {
                spec.seed = value.get<std::uint64_t>();
            } else if (key == "noise_sd") {
                spec.noise_sd = value.get<double>();
            } else if (key == "obs_noise_sd") {
                spec.obs_noise_sd = value.get<double>();
            } else if (key == "planted_outliers") {
                spec.planted_outliers = value.get<std::size_t>();
            } else if (key == "covariate_truncation_sd") {
                spec.covariate_truncation_sd = value.get<double>();
            } else if (key == "intensity") {
                for (const auto& [ik, iv] : value.items()) {
                    if (ik == "mean_bids") spec.intensity.mean_bids = iv.get<double>();
                    else if (ik == "edge_weight") spec.intensity.edge_weight = iv.get<double>();
                    else if (ik == "sd_bids") spec.intensity.sd_bids = iv.get<double>();
                    else throw ValidationError("unknown intensity field '" + ik + "'");
                }
            } else if (key == "beta_curves") {
                // merged over the defaults; set a curve to 0 to remove an effect
                for (const auto& [name, points] : value.items()) {
                    PiecewiseLinear curve;
                    if (points.is_number()) {
                        curve = PiecewiseLinear::constant(points.get<double>());
                    } else {
                        for (const auto& p : points) {
                            if (!p.is_array() || p.size() != 2) {
                                throw ValidationError("beta curve '" + name + "' points must be [t, value] pairs");
                            }
                            curve.points.emplace_back(p[0].get<double>(), p[1].get<double>());
                        }
                    }
                    spec.beta_curves[name] = std::move(curve);
                }
            } else {
                throw ValidationError("unknown spec field '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

std::string truth_record_json(const SyntheticDataset& data) {
    json j;
    j["rng_algorithm"] = std::string(CounterRng::kAlgorithm);
    j["seed"] = data.spec.seed;
    j["spec"] = spec_json(data.spec);
    json beta = json::object();
    for (const auto& name : covariate_names()) {
        auto it = data.spec.beta_curves.find(name);
        beta[name] = it == data.spec.beta_curves.end() ? curve_json(PiecewiseLinear::constant(0.0))
                                                       : curve_json(it->second);
    }
    j["beta_control_points"] = beta;
    j["scale"] = "log_price";
    j["n_lots"] = data.lots.size();
    j["n_bids"] = data.bids.total_bids();
    return j.dump(2) + "\n";
}

void write_dataset(const SyntheticDataset& data, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw Error("cannot write " + (dir / name).string());
        return out;
    };
    {
        auto out = open("lots.csv");
        write_lot_catalog(out, data.lots, TimeFormat::iso8601);
    }
    {
        auto out = open("bids.csv");
        write_bid_history(out, data.bids);
    }
    {
        auto out = open("truth.json");
        out << truth_record_json(data);
    }
}

FunctionalSample latent_sample(const TruthSpec& spec, const Grid& grid) {
    const auto generated = generate_all(spec);
    const BetaTable beta = beta_table(spec);
    const std::size_t n = grid.size();
    const auto rows = static_cast<Eigen::Index>(generated.size());
    FunctionalSample s;
    s.kind = ResponseKind::level;
    s.static_covariates.resize(rows, static_cast<Eigen::Index>(kStaticCovariates));
    s.dynamic_covariate.resize(rows, static_cast<Eigen::Index>(n));
    s.response.resize(rows, static_cast<Eigen::Index>(n));
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& g = generated[static_cast<std::size_t>(r)];
        const CovariateVector cov = build_covariates(g.lot, g.bids, grid);
        const auto x = cov.static_values();
        for (std::size_t c = 0; c < kStaticCovariates; ++c) s.static_covariates(r, static_cast<Eigen::Index>(c)) = x[c];
        for (std::size_t i = 0; i < n; ++i) {
            const auto col = static_cast<Eigen::Index>(i);
            s.dynamic_covariate(r, col) = cov.log_bidders[i];
            s.response(r, col) = latent_value(spec, beta, x, cov.log_bidders[i], grid[i], g.noise);
        }
        s.lot_ids.push_back(g.lot.lot_id);
    }
    return s;
}

CoverageReport coverage_experiment(const TruthSpec& spec, const CoverageOptions& options) {
    spec.validate();
    if (options.reps < 1) throw ValidationError("coverage needs at least one replication");
    const Grid grid(options.grid_size);
    const std::size_t k = kDesignColumns;
    // per rep: covered cells and significant cells per covariate
    std::vector<std::array<double, kDesignColumns>> covered(options.reps);
    std::vector<std::array<double, kDesignColumns>> significant(options.reps);
    parallel_for(options.reps, [&](std::size_t r) {
        TruthSpec rep = spec;
        rep.seed = CounterRng(spec.seed).split(r).key();
        RegressionResult result;
        if (options.mode == CoverageMode::latent) {
            result = coefficient_curves(latent_sample(rep, grid), options.alpha);
        } else {
            const SyntheticDataset data = gen_dataset(rep);
            AnalysisOptions analysis{grid, {}, options.spline, {}, {}};
            analysis.prep.response = ResponseScale::log_price;
            ObservationSet obs = build_observations(data.lots, data.bids, analysis);
            result = coefficient_curves(obs.observations, ResponseKind::level, options.alpha);
        }
        for (std::size_t c = 0; c < k; ++c) {
            const auto& curve = result.curves[c];
            double cov = 0.0;
            double sig = 0.0;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const double truth = rep.beta(c, grid[i]);
                const double slack = 1e-9 * (1.0 + std::abs(truth));
                if (curve.ci_lo[i] - slack <= truth && truth <= curve.ci_hi[i] + slack) cov += 1.0;
                if (curve.significant[i]) sig += 1.0;
            }
            covered[r][c] = cov / static_cast<double>(grid.size());
            significant[r][c] = sig / static_cast<double>(grid.size());
        }
    });

    CoverageReport report;
    report.reps = options.reps;
    const auto& names = covariate_names();
    const double reps = static_cast<double>(options.reps);
    for (std::size_t c = 0; c < k; ++c) {
        double mean = 0.0;
        double sig = 0.0;
        for (std::size_t r = 0; r < options.reps; ++r) {
            mean += covered[r][c];
            sig += significant[r][c];
        }
        mean /= reps;
        double var = 0.0;
        for (std::size_t r = 0; r < options.reps; ++r) var += (covered[r][c] - mean) * (covered[r][c] - mean);
        const double se = options.reps > 1 ? std::sqrt(var / (reps - 1.0) / reps) : 0.0;
        report.covariates.push_back(names[c]);
        report.coverage.push_back(mean);
        report.mc_se.push_back(se);
        report.significance.push_back(sig / reps);
    }
    return report;
}

}  // namespace auctionfda
