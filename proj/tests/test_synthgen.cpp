#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "auctionfda/error.hpp"
#include "auctionfda/funcreg.hpp"
#include "auctionfda/rng.hpp"
#include "auctionfda/synthgen.hpp"
#include "support.hpp"

using namespace auctionfda;

namespace {

std::string bids_text(const SyntheticDataset& d) {
    std::ostringstream out;
    write_bid_history(out, d.bids);
    return out.str();
}

TruthSpec small_spec(std::uint64_t seed, std::size_t lots = 40) {
    auto s = TruthSpec::defaults();
    s.seed = seed;
    s.n_lots = lots;
    return s;
}

}  // namespace

TEST(Rng, CounterStreamsAreReproducibleAndDistinct) {
    CounterRng a(7);
    CounterRng b(7);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
    EXPECT_EQ(a.counter(), 100u);
    auto c1 = CounterRng(7).split(1);
    auto c2 = CounterRng(7).split(2);
    EXPECT_NE(c1.key(), c2.key());
    EXPECT_NE(c1.next_u64(), c2.next_u64());
    // SplitMix64 reference output for seed 0 (first draw of the sequential generator)
    EXPECT_EQ(CounterRng(0).next_u64(), 0xe220a8397b1dcdafULL);
}

TEST(Rng, DistributionMoments) {
    CounterRng r(99);
    const int n = 200000;
    double s = 0.0;
    double s2 = 0.0;
    double u = 0.0;
    double e = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        s += z;
        s2 += z * z;
        const double v = r.uniform();
        ASSERT_GE(v, 0.0);
        ASSERT_LT(v, 1.0);
        u += v;
        e += r.exponential(2.0);
        const auto k = r.uniform_int(3, 5);
        ASSERT_GE(k, 3);
        ASSERT_LE(k, 5);
    }
    EXPECT_NEAR(s / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.01);
    EXPECT_NEAR(u / n, 0.5, 0.005);
    EXPECT_NEAR(e / n, 0.5, 0.005);
}

TEST(Truth, PiecewiseLinearAndIntensity) {
    PiecewiseLinear f{{{0.2, 1.0}, {0.6, 3.0}}};
    EXPECT_EQ(f(0.0), 1.0);
    EXPECT_EQ(f(1.0), 3.0);
    EXPECT_NEAR(f(0.4), 2.0, 1e-15);
    EXPECT_NEAR(PiecewiseLinear::line(2, 4)(0.25), 2.5, 1e-15);

    BidIntensity in;
    double integral = 0.0;
    const int n = 2000;  // Simpson; the rate is quadratic so this is exact
    for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
        integral += w * in.rate(static_cast<double>(i) / n);
    }
    EXPECT_NEAR(integral / (3.0 * n), in.mean_bids, 1e-10);
    EXPECT_GE(in.peak(), in.rate(0.3));
}

TEST(Truth, JsonRoundTripAndValidation) {
    auto s = TruthSpec::defaults();
    s.beta_curves["log_area"] = PiecewiseLinear{{{0.0, -0.1}, {0.5, 0.2}, {1.0, 0.0}}};
    s.planted_outliers = 3;
    const auto text = to_json(s);
    EXPECT_EQ(to_json(truth_spec_from_json(text)), text);

    auto bad = s;
    bad.n_lots = 0;
    EXPECT_THROW(bad.validate(), ValidationError);
    EXPECT_THROW(gen_dataset(bad), ValidationError);
    EXPECT_THROW(truth_spec_from_json(R"({"n_lots": 50, "colour": 3})"), ValidationError);
    EXPECT_THROW(truth_spec_from_json(R"({"beta_curves": {"nonsense": 1}})"), ValidationError);
    EXPECT_THROW(truth_spec_from_json("{"), ValidationError);
    const auto partial = truth_spec_from_json(R"({"n_lots": 50, "beta_curves": {"canvas": 0.25}})");
    EXPECT_EQ(partial.n_lots, 50u);
    EXPECT_EQ(partial.beta(covariate_index("canvas"), 0.7), 0.25);
    EXPECT_EQ(partial.beta(covariate_index("log_opening_bid"), 0.0), 1.0);
}

TEST(Generate, DeterministicInSeed) {
    const auto a = gen_dataset(small_spec(5));
    const auto b = gen_dataset(small_spec(5));
    const auto c = gen_dataset(small_spec(6));
    EXPECT_EQ(a.lots, b.lots);
    EXPECT_EQ(bids_text(a), bids_text(b));
    EXPECT_NE(bids_text(a), bids_text(c));
    EXPECT_EQ(truth_record_json(a), truth_record_json(b));
}

TEST(Generate, LotsAreValidAndBidPathsRise) {
    const auto d = gen_dataset(small_spec(8, 107));
    ASSERT_EQ(d.lots.size(), 107u);
    double total = 0.0;
    for (const auto& lot : d.lots) {
        EXPECT_NO_THROW(validate(lot));
        const auto bids = d.bids.bids_for(lot.lot_id);
        ASSERT_GE(bids.size(), 2u);
        EXPECT_EQ(lot.n_bids, bids.size());
        total += static_cast<double>(bids.size());
        for (std::size_t i = 0; i < bids.size(); ++i) {
            EXPECT_GT(bids[i].amount.minor(), 0);
            EXPECT_GE(bids[i].timestamp, 0.0);
            EXPECT_LE(bids[i].timestamp, lot.duration());
            if (i > 0) {
                EXPECT_GE(bids[i].amount.minor(), bids[i - 1].amount.minor());
                EXPECT_GT(bids[i].timestamp, bids[i - 1].timestamp);
                EXPECT_NE(bids[i].bidder_id, bids[i - 1].bidder_id);
            }
        }
        ASSERT_TRUE(lot.realized_price);
        EXPECT_EQ(*lot.realized_price, bids.back().amount);
    }
    EXPECT_GE(total / 107, 5.0);
    EXPECT_LE(total / 107, 15.0);
}

TEST(Generate, WrittenDatasetParsesBack) {
    const auto d = gen_dataset(small_spec(9, 25));
    const auto dir = testing_support::scratch_dir("synth_write");
    write_dataset(d, dir);
    const auto lots = parse_lot_catalog(dir / "lots.csv");
    const auto bids = parse_bid_history(dir / "bids.csv", lots);
    ASSERT_EQ(lots.size(), 25u);
    EXPECT_EQ(bids.total_bids(), d.bids.total_bids());
    for (std::size_t j = 0; j < lots.size(); ++j) {
        EXPECT_EQ(lots[j].lot_id, d.lots[j].lot_id);
        EXPECT_EQ(lots[j].opening_bid, d.lots[j].opening_bid);
    }
    std::ifstream in(dir / "truth.json");
    const auto truth = nlohmann::json::parse(in);
    EXPECT_EQ(truth.at("rng_algorithm"), "splitmix64-counter");
    EXPECT_EQ(truth.at("seed"), 9);
    EXPECT_EQ(truth.at("scale"), "log_price");
    EXPECT_TRUE(truth.at("beta_control_points").contains("log_opening_bid"));
}

TEST(Generate, PlantedOutliersStandOut) {
    auto s = small_spec(10, 60);
    s.planted_outliers = 4;
    s.covariate_truncation_sd = 1.5;
    const auto d = gen_dataset(s);
    const auto screen = filter_outliers(d.lots, 2.5);
    EXPECT_EQ(screen.kept.size(), 56u);
    for (const auto& id : screen.removed_ids) {
        const auto it = std::find_if(d.lots.begin(), d.lots.end(), [&](const Lot& l) { return l.lot_id == id; });
        EXPECT_GE(it - d.lots.begin(), 56);
    }
}

TEST(Latent, NoiseFreeRecoveryIsExact) {
    auto s = small_spec(11, 60);
    s.noise_sd = 0.0;
    s.obs_noise_sd = 0.0;
    const Grid grid(25);
    const auto r = coefficient_curves(latent_sample(s, grid));
    for (std::size_t k = 0; k < r.curves.size(); ++k) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            EXPECT_NEAR(r.curves[k].beta[i], s.beta(k, grid[i]), 1e-8) << covariate_names()[k] << " at " << i;
        }
    }
}

TEST(Coverage, NominalAtHalfAndPerfectWithoutNoise) {
    auto s = small_spec(12, 60);
    s.noise_sd = 0.1;
    CoverageOptions o;
    o.reps = 200;
    o.alpha = 0.5;
    o.grid_size = 20;
    const auto half = coverage_experiment(s, o);
    ASSERT_EQ(half.coverage.size(), 9u);
    EXPECT_EQ(half.reps, 200u);
    for (std::size_t k = 0; k < 8; ++k) EXPECT_NEAR(half.coverage[k], 0.5, 0.05) << half.covariates[k];

    s.noise_sd = 0.0;
    s.obs_noise_sd = 0.0;
    o.reps = 10;
    const auto exact = coverage_experiment(s, o);
    for (double c : exact.coverage) EXPECT_EQ(c, 1.0);
}
