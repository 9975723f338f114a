#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "auctionfda/grid.hpp"
#include "auctionfda/money.hpp"

namespace auctionfda {

enum class ArtistType { established, emerging, other };
enum class Medium { canvas, paper };
enum class TimeFormat { iso8601, seconds };

std::string_view to_string(ArtistType type);
std::string_view to_string(Medium medium);

/// Case-insensitive; accepts "others" for the base category. Throws std::invalid_argument.
ArtistType parse_artist_type(std::string_view token);

/// Accepts descriptive media such as "Oil on canvas" or "Charcoal on paper".
/// Throws std::invalid_argument for tokens naming neither support.
Medium parse_medium(std::string_view token);

struct BidRecord {
    std::string lot_id;
    std::string bidder_id;
    double timestamp = 0.0;  // seconds since the lot's auction open
    Money amount;
};

struct Lot {
    std::string lot_id;
    std::string artist_id;
    ArtistType artist_type = ArtistType::other;
    Money opening_bid;
    Money low_estimate;
    Money high_estimate;
    int position_group = 1;
    double length_in = 0.0;
    double width_in = 0.0;
    Medium medium = Medium::canvas;
    std::optional<double> prev_price_per_sqin;  // absent when the artist has no prior sales
    int prev_lots_sold = 0;
    std::optional<Money> realized_price;
    double auction_open = 0.0;   // seconds since the epoch
    double auction_close = 0.0;
    std::size_t n_bids = 0;      // derived from the bid history

    double duration() const { return auction_close - auction_open; }
    double area() const { return length_in * width_in; }

    bool operator==(const Lot&) const = default;
};

/// Throws ValidationError naming the lot and the violated invariant.
void validate(const Lot& lot);

/// Bids grouped by lot, each group sorted by timestamp with ties broken by
/// ascending amount.
struct BidHistory {
    std::map<std::string, std::vector<BidRecord>> by_lot;
    TimeFormat time_format = TimeFormat::seconds;
    std::vector<std::string> warnings;

    std::size_t total_bids() const;
    std::span<const BidRecord> bids_for(const std::string& lot_id) const;
};

/// Reads bids.csv. ISO-8601 timestamps are converted to offsets from the lot's
/// auction open and therefore need the catalog; numeric timestamps are offsets
/// already. With a catalog, bids are also checked against the lot windows.
BidHistory parse_bid_history(const std::filesystem::path& path, std::span<const Lot> catalog = {});
BidHistory parse_bid_history(std::istream& in, std::string_view source,
                             std::span<const Lot> catalog = {});

std::vector<Lot> parse_lot_catalog(const std::filesystem::path& path);
std::vector<Lot> parse_lot_catalog(std::istream& in, std::string_view source);

void write_lot_catalog(std::ostream& out, std::span<const Lot> lots,
                       TimeFormat format = TimeFormat::iso8601);

/// Numeric timestamps (seconds since open, millisecond resolution).
void write_bid_history(std::ostream& out, const BidHistory& history);

/// Fills Lot::n_bids from the history.
void attach_bid_counts(std::span<Lot> lots, const BidHistory& history);

struct CovariateOptions {
    // Use log(1 + x) for the prior price per square inch so that missing or
    // zero history maps to 0. Off by default: such lots are rejected.
    bool log1p_history = false;
};

inline constexpr std::size_t kStaticCovariates = 7;

struct CovariateVector {
    double log_prev_price_sqin = 0.0;  // x1
    double established = 0.0;          // x2
    double emerging = 0.0;             // x3
    double log_opening_bid = 0.0;      // x4
    double log_position_group = 0.0;   // x5
    double log_area = 0.0;             // x6
    double canvas = 0.0;               // x7
    std::vector<double> log_bidders;   // x8, one entry per grid point
    std::vector<double> log_bids;      // cumulative bid count; exported, not regressed

    std::vector<double> static_values() const;
};

/// Transformed prior price per square inch, or ValidationError when absent or
/// zero and log1p_history is off.
double history_covariate(const Lot& lot, const CovariateOptions& options);

CovariateVector build_covariates(const Lot& lot, std::span<const BidRecord> bids, const Grid& grid,
                                 const CovariateOptions& options = {});

struct OutlierScreen {
    std::vector<Lot> kept;
    std::vector<std::string> removed_ids;
};

/// Drops lots more than k_sd sample standard deviations from the mean on any of
/// log opening bid, log area or the history covariate. Lots without usable
/// history are screened on the other two variables only.
OutlierScreen filter_outliers(std::span<const Lot> lots, double k_sd, const CovariateOptions& options = {});

struct SummaryStats {
    std::size_t count = 0;
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
};

SummaryStats summarize(std::span<const double> values);

}  // namespace auctionfda
