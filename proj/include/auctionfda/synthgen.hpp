#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "auctionfda/auction_data.hpp"
#include "auctionfda/curve_prep.hpp"
#include "auctionfda/funcreg.hpp"
#include "auctionfda/grid.hpp"
#include "auctionfda/pspline.hpp"

namespace auctionfda {

/// Piecewise-linear function through (t, value) control points, constant
/// outside the first and last point.
struct PiecewiseLinear {
    std::vector<std::pair<double, double>> points;

    static PiecewiseLinear constant(double value);
    static PiecewiseLinear line(double at_zero, double at_one);

    double operator()(double t) const;
};

/// Bid arrivals on normalized time. A lot with K distinct bidders receives
/// K + E bids, E negative binomial, so that bid counts have mean mean_bids
/// and SD sd_bids overall. Given the count, bid times are independent draws
/// from the U-shaped density proportional to
///   rate(t) = mean_bids * (1 + edge_weight * (2t - 1)^2) / (1 + edge_weight / 3)
/// which integrates to mean_bids over [0, 1].
struct BidIntensity {
    double mean_bids = 9.504;
    double sd_bids = 5.159;
    double edge_weight = 8.0;

    double rate(double t) const;
    double peak() const;
};

/// Declared generating moments for the catalog covariates (log-normal mean and SD
/// on the natural scale) of the sale the generator imitates.
struct GeneratingMoments {
    double mean;
    double sd;
};

namespace generating {
inline constexpr GeneratingMoments kOpeningBid{11195.0, 13943.0};
inline constexpr GeneratingMoments kArea{1273.0, 1304.0};
inline constexpr GeneratingMoments kPrevPricePerSqin{36.0, 42.0};
inline constexpr GeneratingMoments kPrevLotsSold{19.33, 19.0};
inline constexpr GeneratingMoments kBiddersPerLot{4.06, 1.64};
inline constexpr double kEstablishedShare = 33.0 / 107.0;
inline constexpr double kEmergingShare = 20.0 / 107.0;
inline constexpr double kCanvasShare = 0.6;
inline constexpr int kPositionGroups = 5;
inline constexpr int kBidderPool = 127;
}  // namespace generating

struct TruthSpec {
    // Keyed by covariate_names(); absent covariates have a zero curve. Values
    // are on the log-price scale.
    std::map<std::string, PiecewiseLinear> beta_curves;
    double noise_sd = 0.05;       // lot-level smooth deviation (endpoint SD of a linear bridge)
    double obs_noise_sd = 0.01;   // per-bid log-scale noise before the running maximum
    std::size_t n_lots = 107;
    BidIntensity intensity;
    std::uint64_t seed = 42;
    std::size_t planted_outliers = 0;       // last lots get opening bids ~8 SD high
    double covariate_truncation_sd = 0.0;   // > 0 truncates log-normal draws at +/- this many SD

    /// Opening-bid effect falling linearly from 1 to 0, with an intercept
    /// steep enough that every latent path rises.
    static TruthSpec defaults();

    /// Throws ValidationError.
    void validate() const;

    double beta(std::size_t covariate, double t) const;
};

struct SyntheticDataset {
    TruthSpec spec;
    std::vector<Lot> lots;
    BidHistory bids;
};

/// Deterministic in spec.seed; lot j draws from stream split(j).
SyntheticDataset gen_dataset(const TruthSpec& spec);

std::string to_json(const TruthSpec& spec);
TruthSpec truth_spec_from_json(std::string_view text);

/// truth.json: RNG algorithm, seed, spec echo and the beta control points.
std::string truth_record_json(const SyntheticDataset& data);

/// Writes lots.csv, bids.csv and truth.json into dir.
void write_dataset(const SyntheticDataset& data, const std::filesystem::path& dir);

/// Lots x grid regression sample drawn straight from the latent model
/// y_j(t) = sum_k x_jk(t) beta_k(t) + e_j(t), without the bidding pipeline.
FunctionalSample latent_sample(const TruthSpec& spec, const Grid& grid);

enum class CoverageMode { latent, pipeline };

struct CoverageOptions {
    std::size_t reps = 1000;
    double alpha = 0.05;
    CoverageMode mode = CoverageMode::latent;
    std::size_t grid_size = Grid::kDefaultSize;
    SplineConfig spline = SplineConfig::equally_spaced();  // pipeline mode only
};

struct CoverageReport {
    std::vector<std::string> covariates;
    std::vector<double> coverage;        // fraction of (rep, t) cells covering the truth
    std::vector<double> mc_se;           // SE over per-rep coverage fractions
    std::vector<double> significance;    // fraction of cells whose band excludes zero
    std::size_t reps = 0;
};

/// Replication r uses seed mix(spec.seed, r). Band coverage is checked with a
/// 1e-9 * (1 + |beta|) slack so that zero-noise bands count as covering.
CoverageReport coverage_experiment(const TruthSpec& spec, const CoverageOptions& options = {});

}  // namespace auctionfda
