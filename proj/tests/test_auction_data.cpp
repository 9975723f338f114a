#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "auctionfda/auction_data.hpp"
#include "auctionfda/error.hpp"
#include "auctionfda/io.hpp"
#include "support.hpp"

using namespace auctionfda;
using testing_support::fixture;

namespace {

const std::string kHeader =
    "lot_id,artist_id,artist_type,opening_bid,low_estimate,high_estimate,position_group,length_in,width_in,medium,"
    "prev_price_per_sqin,prev_lots_sold,realized_price,auction_open,auction_close\n";

std::vector<Lot> catalog_from(const std::string& rows) {
    std::istringstream in(kHeader + rows);
    return parse_lot_catalog(in, "lots.csv");
}

const Lot& by_id(const std::vector<Lot>& lots, const std::string& id) {
    return *std::find_if(lots.begin(), lots.end(), [&](const Lot& l) { return l.lot_id == id; });
}

Lot plain_lot(const std::string& id, double opening, double area = 100.0, double prev = 10.0) {
    Lot l;
    l.lot_id = id;
    l.artist_id = "a";
    l.opening_bid = Money::from_major(opening);
    l.low_estimate = Money::from_major(opening * 1.2);
    l.high_estimate = Money::from_major(opening * 1.5);
    l.length_in = area / 10.0;
    l.width_in = 10.0;
    l.prev_price_per_sqin = prev;
    l.auction_open = 0.0;
    l.auction_close = 100.0;
    return l;
}

}  // namespace

TEST(LotCatalog, SampleCatalogFieldsVerbatim) {
    const auto lots = parse_lot_catalog(fixture("sample_lots.csv"));
    ASSERT_EQ(lots.size(), 4u);
    const Lot& l16 = by_id(lots, "16");
    EXPECT_EQ(l16.low_estimate, Money::parse("26670"));
    EXPECT_EQ(l16.high_estimate, Money::parse("31120"));
    EXPECT_EQ(l16.realized_price, Money::parse("46225"));
    EXPECT_EQ(l16.length_in, 36.0);
    EXPECT_EQ(l16.width_in, 36.0);
    EXPECT_EQ(l16.medium, Medium::canvas);
    EXPECT_EQ(l16.artist_type, ArtistType::established);

    const Lot& l1 = by_id(lots, "1");
    EXPECT_EQ(l1.medium, Medium::canvas);  // "Oil on canvas"
    EXPECT_EQ(l1.artist_type, ArtistType::other);
    EXPECT_EQ(l1.length_in, 40.5);
    EXPECT_EQ(l1.width_in, 68.5);
    EXPECT_EQ(l1.realized_price, Money::parse("7794"));

    const Lot& l10 = by_id(lots, "10");
    EXPECT_EQ(l10.medium, Medium::paper);  // "Charcoal on paper"
    EXPECT_EQ(l10.low_estimate, Money::parse("6340"));
    EXPECT_EQ(l10.high_estimate, Money::parse("8560"));

    const Lot& l81 = by_id(lots, "81");
    EXPECT_EQ(l81.medium, Medium::canvas);  // "Acrylic on canvas pasted on board"
    EXPECT_EQ(l81.artist_type, ArtistType::emerging);
    EXPECT_EQ(l81.realized_price, Money::parse("12094"));
    EXPECT_EQ(l81.area(), 30.0 * 71.0);
}

TEST(LotCatalog, ArtistTypeCaseInsensitive) {
    EXPECT_EQ(parse_artist_type("ESTABLISHED"), ArtistType::established);
    EXPECT_EQ(parse_artist_type("Emerging"), ArtistType::emerging);
    EXPECT_EQ(parse_artist_type("others"), ArtistType::other);
    EXPECT_THROW(parse_artist_type("famous"), std::invalid_argument);
    EXPECT_EQ(parse_medium("Oil on canvas"), Medium::canvas);
    EXPECT_THROW(parse_medium("bronze"), std::invalid_argument);
}

TEST(LotCatalog, HighBelowLowIsParseError) {
    try {
        catalog_from("7,a,other,100,500,400,1,10,10,canvas,5,1,,2004-12-06T09:30:00Z,2004-12-09T09:30:00Z\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(LotCatalog, RejectsBadTokensAndInvariants) {
    const std::string tail = ",2004-12-06T09:30:00Z,2004-12-09T09:30:00Z\n";
    EXPECT_THROW(catalog_from("7,a,other,100,500,600,1,10,10,bronze,5,1," + tail), ParseError);
    EXPECT_THROW(catalog_from("7,a,legend,100,500,600,1,10,10,canvas,5,1," + tail), ParseError);
    EXPECT_THROW(catalog_from("7,a,other,700,500,600,1,10,10,canvas,5,1," + tail), ParseError);  // opening > low
    EXPECT_THROW(catalog_from("7,a,other,100,500,600,1,0,10,canvas,5,1," + tail), ParseError);
    EXPECT_THROW(catalog_from("7,a,other,100,500,600,1,10,10,canvas,5,1,,2004-12-09T09:30:00Z,2004-12-06T09:30:00Z\n"),
                 ParseError);
    EXPECT_THROW(catalog_from("7,a,other,100,500,600,1,10,10,canvas,5,1," + tail + "7,a,other,100,500,600,1,10,10,canvas,5,1," + tail),
                 ParseError);
}

TEST(LotCatalog, RoundTripIsIdentity) {
    const auto lots = parse_lot_catalog(fixture("sample_lots.csv"));
    for (TimeFormat format : {TimeFormat::iso8601, TimeFormat::seconds}) {
        std::ostringstream out;
        write_lot_catalog(out, lots, format);
        std::istringstream in(out.str());
        const auto again = parse_lot_catalog(in, "roundtrip");
        EXPECT_EQ(again, lots);
    }
}

TEST(BidHistoryTest, SampleHistoryGroups) {
    const auto lots = parse_lot_catalog(fixture("sample_lots.csv"));
    const auto history = parse_bid_history(fixture("sample_bids.csv"), lots);
    EXPECT_EQ(history.time_format, TimeFormat::iso8601);
    const std::map<std::string, std::pair<std::size_t, std::size_t>> expected = {
        {"1", {12, 4}}, {"10", {5, 4}}, {"16", {11, 5}}, {"81", {15, 5}}};
    for (const auto& [id, counts] : expected) {
        const auto bids = history.bids_for(id);
        EXPECT_EQ(bids.size(), counts.first) << id;
        std::set<std::string> bidders;
        for (const auto& b : bids) bidders.insert(b.bidder_id);
        EXPECT_EQ(bidders.size(), counts.second) << id;
        EXPECT_TRUE(std::is_sorted(bids.begin(), bids.end(),
                                   [](const BidRecord& a, const BidRecord& b) { return a.timestamp < b.timestamp; }));
        EXPECT_EQ(bids.back().amount, by_id(lots, id).realized_price);
    }
    // lot 81 opens near 30% of its realized value
    EXPECT_NEAR(history.bids_for("81").front().amount.major() / 12094.0, 0.30, 0.01);
}

TEST(BidHistoryTest, EmptyFileWarns) {
    std::istringstream in("");
    const auto h = parse_bid_history(in, "bids.csv");
    EXPECT_EQ(h.total_bids(), 0u);
    EXPECT_EQ(h.warnings.size(), 1u);
}

TEST(BidHistoryTest, NegativeAmountNamesRow) {
    std::istringstream in("lot_id,bidder_id,timestamp,amount\nL1,b1,10,100\nL1,b2,20,-5\n");
    try {
        parse_bid_history(in, "bids.csv");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_NE(std::string(e.what()).find("bids.csv:3"), std::string::npos);
    }
}

TEST(BidHistoryTest, Rejections) {
    const std::vector<Lot> catalog{plain_lot("L1", 50.0)};
    auto parse = [&](const std::string& rows) {
        std::istringstream in("lot_id,bidder_id,timestamp,amount\n" + rows);
        return parse_bid_history(in, "bids.csv", catalog);
    };
    EXPECT_NO_THROW(parse("L1,a,10,100\nL1,b,20,110\n"));
    EXPECT_THROW(parse("L1,a,10,100\nL1,a,10,100\n"), ParseError);   // duplicate row
    EXPECT_THROW(parse("L1,a,10,100\nL1,b,200,110\n"), ParseError);  // outside window
    EXPECT_THROW(parse("L1,a,10,100\nL1,b,20,90\n"), ParseError);    // price fell
    EXPECT_THROW(parse("L2,a,10,100\n"), ParseError);                // unknown lot
    EXPECT_THROW(parse("L1,a,ten,100\n"), ParseError);
}

TEST(BidHistoryTest, NumericRoundTrip) {
    const auto lots = parse_lot_catalog(fixture("sample_lots.csv"));
    const auto history = parse_bid_history(fixture("sample_bids.csv"), lots);
    std::ostringstream out;
    write_bid_history(out, history);
    std::istringstream in(out.str());
    const auto again = parse_bid_history(in, "roundtrip", lots);
    ASSERT_EQ(again.total_bids(), history.total_bids());
    for (const auto& [id, bids] : history.by_lot) {
        const auto other = again.bids_for(id);
        for (std::size_t i = 0; i < bids.size(); ++i) {
            EXPECT_EQ(other[i].timestamp, bids[i].timestamp);
            EXPECT_EQ(other[i].amount, bids[i].amount);
            EXPECT_EQ(other[i].bidder_id, bids[i].bidder_id);
        }
    }
}

TEST(Covariates, SampleLotSixteen) {
    auto lots = parse_lot_catalog(fixture("sample_lots.csv"));
    const auto history = parse_bid_history(fixture("sample_bids.csv"), lots);
    const Lot& l16 = by_id(lots, "16");
    const auto x = build_covariates(l16, history.bids_for("16"), Grid());
    EXPECT_NEAR(x.log_area, 7.1670378769122, 1e-12);  // log(1296)
    EXPECT_EQ(x.established, 1.0);
    EXPECT_EQ(x.emerging, 0.0);
    EXPECT_EQ(x.canvas, 1.0);
    EXPECT_EQ(x.log_opening_bid, std::log(22670.0));
    EXPECT_EQ(x.log_position_group, 0.0);
    EXPECT_EQ(x.log_bidders.back(), std::log(5.0));

    const auto x1 = build_covariates(by_id(lots, "1"), history.bids_for("1"), Grid());
    EXPECT_EQ(x1.established, 0.0);
    EXPECT_EQ(x1.emerging, 0.0);
    EXPECT_EQ(by_id(lots, "81").position_group, 4);
    EXPECT_EQ(build_covariates(by_id(lots, "81"), history.bids_for("81"), Grid()).log_position_group, std::log(4.0));
}

TEST(Covariates, UniqueBidderCount) {
    Lot lot = plain_lot("L1", 50.0);
    std::vector<BidRecord> bids{{"L1", "A", 20.0, Money::from_major(60)},
                                {"L1", "B", 50.0, Money::from_major(70)},
                                {"L1", "A", 90.0, Money::from_major(80)}};
    const Grid grid(11);  // t = 0, 0.1, ..., 1
    const auto x = build_covariates(lot, bids, grid);
    EXPECT_EQ(x.log_bidders[0], 0.0);  // floor at one bidder before the first bid
    EXPECT_EQ(x.log_bidders[6], std::log(2.0));
    EXPECT_EQ(x.log_bidders[10], std::log(2.0));
    EXPECT_EQ(x.log_bids[10], std::log(3.0));
}

TEST(Covariates, MissingHistory) {
    Lot lot = plain_lot("L1", 50.0);
    lot.prev_price_per_sqin.reset();
    EXPECT_THROW(build_covariates(lot, {}, Grid()), ValidationError);
    lot.prev_price_per_sqin = 0.0;
    EXPECT_THROW(build_covariates(lot, {}, Grid()), ValidationError);
    EXPECT_EQ(build_covariates(lot, {}, Grid(), {.log1p_history = true}).log_prev_price_sqin, 0.0);
    lot.prev_price_per_sqin = 9.0;
    EXPECT_EQ(build_covariates(lot, {}, Grid(), {.log1p_history = true}).log_prev_price_sqin, std::log(10.0));
}

TEST(Covariates, PropertiesOnRandomLots) {
    testing_support::Draws draws(11);
    const Grid grid;
    for (int trial = 0; trial < 200; ++trial) {
        Lot lot = plain_lot("L", draws.uniform(10, 1000));
        lot.artist_type = static_cast<ArtistType>(draws.integer(0, 2));
        std::vector<BidRecord> bids;
        double t = 0.0;
        const int n = draws.integer(1, 30);
        std::set<std::string> all;
        for (int i = 0; i < n; ++i) {
            t += draws.uniform(0.0, 100.0 / n);
            std::string who = "b" + std::to_string(draws.integer(1, 6));
            all.insert(who);
            bids.push_back({"L", who, std::min(t, 100.0), Money::from_major(100 + i)});
        }
        const auto x = build_covariates(lot, bids, grid);
        EXPECT_EQ(x.established * x.emerging, 0.0);
        EXPECT_TRUE(std::is_sorted(x.log_bidders.begin(), x.log_bidders.end()));
        EXPECT_LE(x.log_bidders.back(), std::log(static_cast<double>(all.size())) + 1e-15);
    }
}

TEST(Outliers, IdenticalLotsKeepAll) {
    std::vector<Lot> lots;
    for (int i = 0; i < 10; ++i) lots.push_back(plain_lot("L" + std::to_string(i), 100.0));
    const auto screen = filter_outliers(lots, 2.5);
    EXPECT_EQ(screen.kept.size(), 10u);
    EXPECT_TRUE(screen.removed_ids.empty());
}

TEST(Outliers, SingleFarLotRemoved) {
    testing_support::Draws draws(5);
    std::vector<Lot> lots;
    std::vector<double> log_open;
    for (int i = 0; i < 40; ++i) {
        const double v = std::exp(8.0 + draws.normal(0.5));
        lots.push_back(plain_lot("L" + std::to_string(i), std::round(v), 500.0 + i, 20.0 + 0.1 * i));
        log_open.push_back(std::log(lots.back().opening_bid.major()));
    }
    // reference mean and SD of the clean lots, then place the outlier 10 SD out
    double mean = 0.0;
    for (double v : log_open) mean += v;
    mean /= static_cast<double>(log_open.size());
    double ss = 0.0;
    for (double v : log_open) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(log_open.size() - 1));
    lots.push_back(plain_lot("far", std::round(std::exp(mean + 10.0 * sd)), 520.0, 22.0));
    log_open.push_back(std::log(lots.back().opening_bid.major()));

    // direct z-scores with the outlier included
    mean = 0.0;
    for (double v : log_open) mean += v;
    mean /= static_cast<double>(log_open.size());
    ss = 0.0;
    for (double v : log_open) ss += (v - mean) * (v - mean);
    const double sd_all = std::sqrt(ss / static_cast<double>(log_open.size() - 1));
    std::vector<std::string> expected;
    for (std::size_t i = 0; i < lots.size(); ++i) {
        if (std::abs(log_open[i] - mean) > 2.5 * sd_all) expected.push_back(lots[i].lot_id);
    }
    ASSERT_EQ(expected, std::vector<std::string>{"far"});

    const auto screen = filter_outliers(lots, 2.5);
    EXPECT_EQ(screen.removed_ids, expected);
    EXPECT_EQ(screen.kept.size(), 40u);
}

TEST(Summary, LotCountRows) {
    const auto table = io::read_csv_file(fixture("lot_counts.csv"));
    std::vector<double> bidders;
    std::vector<double> bids;
    for (const auto& row : table.rows) {
        bidders.push_back(*io::parse_real(row.fields[1]));
        bids.push_back(*io::parse_real(row.fields[2]));
    }
    const auto b = summarize(bidders);
    EXPECT_EQ(b.count, 107u);
    EXPECT_EQ(std::round(b.mean * 100) / 100, 4.06);
    EXPECT_EQ(std::round(b.sd * 100) / 100, 1.64);
    EXPECT_EQ(b.median, 4.0);
    EXPECT_EQ(b.min, 2.0);
    EXPECT_EQ(b.max, 8.0);

    const auto n = summarize(bids);
    EXPECT_NEAR(n.mean, 9.504, 1e-3);
    EXPECT_EQ(std::round(n.sd * 1000) / 1000, 5.159);
    EXPECT_EQ(n.median, 8.0);
    EXPECT_EQ(n.min, 2.0);
    EXPECT_EQ(n.max, 23.0);
}

TEST(Summary, SmallCases) {
    const std::vector<double> v{3.0, 1.0, 2.0, 10.0};
    const auto s = summarize(v);
    EXPECT_EQ(s.median, 2.5);
    EXPECT_EQ(s.mean, 4.0);
    EXPECT_NEAR(s.sd, std::sqrt(((1.0) + 9.0 + 4.0 + 36.0) / 3.0), 1e-14);
}
