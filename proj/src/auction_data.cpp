#include "auctionfda/auction_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>
#include <tuple>

#include "auctionfda/curve_prep.hpp"
#include "auctionfda/error.hpp"
#include "auctionfda/io.hpp"

namespace auctionfda {

Money Money::parse(std::string_view text) {
    std::string s = io::trim(text);
    std::size_t pos = 0;
    bool negative = false;
    if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) negative = s[pos++] == '-';
    std::int64_t whole = 0;
    std::size_t digits = 0;
    constexpr auto kLimit = std::numeric_limits<std::int64_t>::max() / 1000;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
        if (whole > kLimit) throw std::invalid_argument("amount out of range: " + s);
        whole = whole * 10 + (s[pos++] - '0');
        ++digits;
    }
    std::int64_t cents = 0;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        int frac_digits = 0;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
            if (++frac_digits > 2) throw std::invalid_argument("more than two decimals in amount: " + s);
            cents = cents * 10 + (s[pos++] - '0');
        }
        if (frac_digits == 1) cents *= 10;
        digits += static_cast<std::size_t>(frac_digits);
    }
    if (digits == 0 || pos != s.size()) throw std::invalid_argument("not a decimal amount: '" + s + "'");
    std::int64_t minor = whole * kMinorPerMajor + cents;
    return Money(negative ? -minor : minor);
}

Money Money::from_major(double major) {
    return Money(static_cast<std::int64_t>(std::llround(major * kMinorPerMajor)));
}

std::string Money::to_string() const {
    std::int64_t abs = minor_ < 0 ? -minor_ : minor_;
    std::string out = (minor_ < 0 ? "-" : "") + std::to_string(abs / kMinorPerMajor);
    std::int64_t cents = abs % kMinorPerMajor;
    if (cents != 0) {
        out += '.';
        out += static_cast<char>('0' + cents / 10);
        out += static_cast<char>('0' + cents % 10);
    }
    return out;
}

std::string_view to_string(ArtistType type) {
    switch (type) {
        case ArtistType::established: return "established";
        case ArtistType::emerging: return "emerging";
        case ArtistType::other: return "other";
    }
    return "other";
}

std::string_view to_string(Medium medium) { return medium == Medium::canvas ? "canvas" : "paper"; }

ArtistType parse_artist_type(std::string_view token) {
    std::string t = io::to_lower(io::trim(token));
    if (t == "established") return ArtistType::established;
    if (t == "emerging") return ArtistType::emerging;
    if (t == "other" || t == "others") return ArtistType::other;
    throw std::invalid_argument("unknown artist_type '" + std::string(token) + "'");
}

Medium parse_medium(std::string_view token) {
    std::string t = io::to_lower(io::trim(token));
    // "Acrylic on canvas pasted on board" is a canvas work
    if (t.find("canvas") != std::string::npos) return Medium::canvas;
    if (t.find("paper") != std::string::npos) return Medium::paper;
    throw std::invalid_argument("unknown medium '" + std::string(token) + "'");
}

void validate(const Lot& lot) {
    auto fail = [&](const std::string& what) { throw ValidationError("lot " + lot.lot_id + ": " + what); };
    if (lot.lot_id.empty()) throw ValidationError("lot with empty lot_id");
    if (!lot.opening_bid.positive()) fail("opening_bid must be positive");
    if (lot.opening_bid > lot.low_estimate) fail("opening_bid exceeds low_estimate");
    if (lot.low_estimate > lot.high_estimate) fail("low_estimate exceeds high_estimate");
    if (lot.position_group < 1) fail("position_group must be >= 1");
    if (!(lot.length_in > 0.0) || !(lot.width_in > 0.0)) fail("dimensions must be positive");
    if (lot.prev_price_per_sqin && !(*lot.prev_price_per_sqin >= 0.0)) fail("prev_price_per_sqin must be >= 0");
    if (lot.prev_lots_sold < 0) fail("prev_lots_sold must be >= 0");
    if (lot.realized_price && !lot.realized_price->positive()) fail("realized_price must be positive");
    if (!(lot.auction_open < lot.auction_close)) fail("auction_open must precede auction_close");
}

std::size_t BidHistory::total_bids() const {
    std::size_t n = 0;
    for (const auto& [id, bids] : by_lot) n += bids.size();
    return n;
}

std::span<const BidRecord> BidHistory::bids_for(const std::string& lot_id) const {
    auto it = by_lot.find(lot_id);
    if (it == by_lot.end()) return {};
    return it->second;
}

namespace {

const std::vector<std::string> kLotColumns = {
    "lot_id",         "artist_id",      "artist_type",         "opening_bid",    "low_estimate",
    "high_estimate",  "position_group", "length_in",           "width_in",       "medium",
    "prev_price_per_sqin", "prev_lots_sold", "realized_price", "auction_open", "auction_close"};

TimeFormat detect_time_format(std::string_view sample) {
    return io::parse_real(sample) ? TimeFormat::seconds : TimeFormat::iso8601;
}

double parse_instant(std::string_view text, TimeFormat format, std::string_view source, std::size_t line) {
    auto v = format == TimeFormat::seconds ? io::parse_real(text) : io::parse_iso8601(text);
    if (!v) {
        throw ParseError(std::string(source), line,
                         "timestamp '" + std::string(text) + "' does not match the file's " +
                             (format == TimeFormat::seconds ? "numeric" : "ISO-8601") + " format");
    }
    return *v;
}

Money parse_money(std::string_view text, std::string_view column, std::string_view source, std::size_t line) {
    try {
        return Money::parse(text);
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string(source), line, std::string(column) + ": " + e.what());
    }
}

double parse_positive_real(std::string_view text, std::string_view column, std::string_view source,
                           std::size_t line) {
    auto v = io::parse_real(text);
    if (!v) throw ParseError(std::string(source), line, std::string(column) + ": not a number '" + std::string(text) + "'");
    return *v;
}

int parse_int(std::string_view text, std::string_view column, std::string_view source, std::size_t line) {
    auto v = io::parse_integer(text);
    if (!v || *v < std::numeric_limits<int>::min() || *v > std::numeric_limits<int>::max()) {
        throw ParseError(std::string(source), line, std::string(column) + ": not an integer '" + std::string(text) + "'");
    }
    return static_cast<int>(*v);
}

}  // namespace

std::vector<Lot> parse_lot_catalog(std::istream& in, std::string_view source) {
    io::CsvTable table = io::read_csv(in, source);
    std::vector<Lot> lots;
    if (table.empty_source) return lots;
    std::vector<std::size_t> col;
    for (const auto& name : kLotColumns) col.push_back(io::require_column(table, name, source));
    if (table.rows.empty()) return lots;

    const TimeFormat format = detect_time_format(table.rows.front().fields[col[13]]);
    std::set<std::string> seen;
    for (const auto& row : table.rows) {
        const auto& f = row.fields;
        const std::size_t line = row.line;
        Lot lot;
        lot.lot_id = f[col[0]];
        lot.artist_id = f[col[1]];
        try {
            lot.artist_type = parse_artist_type(f[col[2]]);
            lot.medium = parse_medium(f[col[9]]);
        } catch (const std::invalid_argument& e) {
            throw ParseError(std::string(source), line, e.what());
        }
        lot.opening_bid = parse_money(f[col[3]], "opening_bid", source, line);
        lot.low_estimate = parse_money(f[col[4]], "low_estimate", source, line);
        lot.high_estimate = parse_money(f[col[5]], "high_estimate", source, line);
        lot.position_group = parse_int(f[col[6]], "position_group", source, line);
        lot.length_in = parse_positive_real(f[col[7]], "length_in", source, line);
        lot.width_in = parse_positive_real(f[col[8]], "width_in", source, line);
        if (!f[col[10]].empty()) lot.prev_price_per_sqin = parse_positive_real(f[col[10]], "prev_price_per_sqin", source, line);
        lot.prev_lots_sold = parse_int(f[col[11]], "prev_lots_sold", source, line);
        if (!f[col[12]].empty()) lot.realized_price = parse_money(f[col[12]], "realized_price", source, line);
        lot.auction_open = parse_instant(f[col[13]], format, source, line);
        lot.auction_close = parse_instant(f[col[14]], format, source, line);
        try {
            validate(lot);
        } catch (const ValidationError& e) {
            throw ParseError(std::string(source), line, e.what());
        }
        if (!seen.insert(lot.lot_id).second) {
            throw ParseError(std::string(source), line, "duplicate lot_id " + lot.lot_id);
        }
        lots.push_back(std::move(lot));
    }
    return lots;
}

std::vector<Lot> parse_lot_catalog(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return parse_lot_catalog(in, path.string());
}

BidHistory parse_bid_history(std::istream& in, std::string_view source, std::span<const Lot> catalog) {
    io::CsvTable table = io::read_csv(in, source);
    BidHistory history;
    if (table.empty_source || table.rows.empty()) {
        history.warnings.push_back(std::string(source) + ": no bids");
        return history;
    }
    const std::size_t c_lot = io::require_column(table, "lot_id", source);
    const std::size_t c_bidder = io::require_column(table, "bidder_id", source);
    const std::size_t c_time = io::require_column(table, "timestamp", source);
    const std::size_t c_amount = io::require_column(table, "amount", source);

    std::map<std::string, const Lot*> lots;
    for (const auto& lot : catalog) lots.emplace(lot.lot_id, &lot);

    history.time_format = detect_time_format(table.rows.front().fields[c_time]);
    if (history.time_format == TimeFormat::iso8601 && catalog.empty()) {
        throw ParseError(std::string(source), table.rows.front().line,
                         "ISO-8601 bid timestamps need the lot catalog to resolve auction open times");
    }

    struct Pending {
        BidRecord bid;
        std::size_t line;
    };
    std::map<std::string, std::vector<Pending>> grouped;
    std::map<std::tuple<std::string, std::string, double>, std::size_t> keys;

    for (const auto& row : table.rows) {
        const auto& f = row.fields;
        BidRecord bid;
        bid.lot_id = f[c_lot];
        bid.bidder_id = f[c_bidder];
        if (bid.lot_id.empty() || bid.bidder_id.empty()) {
            throw ParseError(std::string(source), row.line, "empty lot_id or bidder_id");
        }
        bid.amount = parse_money(f[c_amount], "amount", source, row.line);
        if (!bid.amount.positive()) {
            throw ParseError(std::string(source), row.line, "non-positive amount " + f[c_amount]);
        }
        const Lot* lot = nullptr;
        if (!lots.empty()) {
            auto it = lots.find(bid.lot_id);
            if (it == lots.end()) throw ParseError(std::string(source), row.line, "unknown lot_id " + bid.lot_id);
            lot = it->second;
        }
        double raw = parse_instant(f[c_time], history.time_format, source, row.line);
        bid.timestamp = history.time_format == TimeFormat::iso8601 ? raw - lot->auction_open : raw;
        const double window = lot ? lot->duration() : std::numeric_limits<double>::infinity();
        if (!(bid.timestamp >= 0.0 && bid.timestamp <= window)) {
            throw ParseError(std::string(source), row.line, "timestamp outside the auction window of lot " + bid.lot_id);
        }
        auto [it, inserted] = keys.emplace(std::make_tuple(bid.lot_id, bid.bidder_id, bid.timestamp), row.line);
        if (!inserted) {
            throw ParseError(std::string(source), row.line,
                             "duplicate bid (lot, bidder, timestamp), first seen on line " + std::to_string(it->second));
        }
        grouped[bid.lot_id].push_back({std::move(bid), row.line});
    }

    for (auto& [lot_id, pending] : grouped) {
        std::stable_sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
            if (a.bid.timestamp != b.bid.timestamp) return a.bid.timestamp < b.bid.timestamp;
            return a.bid.amount < b.bid.amount;
        });
        auto& out = history.by_lot[lot_id];
        out.reserve(pending.size());
        for (std::size_t i = 0; i < pending.size(); ++i) {
            if (i > 0 && pending[i].bid.amount < pending[i - 1].bid.amount) {
                throw ParseError(std::string(source), pending[i].line,
                                 "bid amount decreases over time in lot " + lot_id);
            }
            out.push_back(std::move(pending[i].bid));
        }
    }
    return history;
}

BidHistory parse_bid_history(const std::filesystem::path& path, std::span<const Lot> catalog) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return parse_bid_history(in, path.string(), catalog);
}

void write_lot_catalog(std::ostream& out, std::span<const Lot> lots, TimeFormat format) {
    for (std::size_t i = 0; i < kLotColumns.size(); ++i) out << (i ? "," : "") << kLotColumns[i];
    out << '\n';
    auto instant = [format](double t) {
        return format == TimeFormat::iso8601 ? io::format_iso8601(t) : io::format_real(t);
    };
    for (const auto& lot : lots) {
        out << io::csv_escape(lot.lot_id) << ',' << io::csv_escape(lot.artist_id) << ','
            << to_string(lot.artist_type) << ',' << lot.opening_bid.to_string() << ','
            << lot.low_estimate.to_string() << ',' << lot.high_estimate.to_string() << ','
            << lot.position_group << ',' << io::format_real(lot.length_in) << ','
            << io::format_real(lot.width_in) << ',' << to_string(lot.medium) << ','
            << (lot.prev_price_per_sqin ? io::format_real(*lot.prev_price_per_sqin) : "") << ','
            << lot.prev_lots_sold << ',' << (lot.realized_price ? lot.realized_price->to_string() : "") << ','
            << instant(lot.auction_open) << ',' << instant(lot.auction_close) << '\n';
    }
}

void write_bid_history(std::ostream& out, const BidHistory& history) {
    out << "lot_id,bidder_id,timestamp,amount\n";
    for (const auto& [lot_id, bids] : history.by_lot) {
        for (const auto& bid : bids) {
            out << io::csv_escape(bid.lot_id) << ',' << io::csv_escape(bid.bidder_id) << ','
                << io::format_real(bid.timestamp) << ',' << bid.amount.to_string() << '\n';
        }
    }
}

void attach_bid_counts(std::span<Lot> lots, const BidHistory& history) {
    for (auto& lot : lots) lot.n_bids = history.bids_for(lot.lot_id).size();
}

std::vector<double> CovariateVector::static_values() const {
    return {log_prev_price_sqin, established, emerging, log_opening_bid, log_position_group, log_area, canvas};
}

double history_covariate(const Lot& lot, const CovariateOptions& options) {
    if (options.log1p_history) return std::log1p(lot.prev_price_per_sqin.value_or(0.0));
    if (!lot.prev_price_per_sqin || *lot.prev_price_per_sqin <= 0.0) {
        throw ValidationError("lot " + lot.lot_id +
                              ": prior price per square inch is missing or zero; enable the log(1+x) "
                              "history transform to include it");
    }
    return std::log(*lot.prev_price_per_sqin);
}

CovariateVector build_covariates(const Lot& lot, std::span<const BidRecord> bids, const Grid& grid,
                                 const CovariateOptions& options) {
    validate(lot);
    CovariateVector x;
    x.log_prev_price_sqin = history_covariate(lot, options);
    x.established = lot.artist_type == ArtistType::established ? 1.0 : 0.0;
    x.emerging = lot.artist_type == ArtistType::emerging ? 1.0 : 0.0;
    x.log_opening_bid = std::log(lot.opening_bid.major());
    x.log_position_group = std::log(static_cast<double>(lot.position_group));
    x.log_area = std::log(lot.area());
    x.canvas = lot.medium == Medium::canvas ? 1.0 : 0.0;

    const auto times = normalize_times(bids, lot);
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (times[i].t < times[i - 1].t) throw ValidationError("lot " + lot.lot_id + ": bids are not sorted by time");
    }
    x.log_bidders.resize(grid.size());
    x.log_bids.resize(grid.size());
    std::set<std::string_view> bidders;
    std::size_t next = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        while (next < bids.size() && times[next].t <= grid[i]) bidders.insert(bids[next++].bidder_id);
        x.log_bidders[i] = std::log(static_cast<double>(std::max<std::size_t>(1, bidders.size())));
        x.log_bids[i] = std::log(static_cast<double>(std::max<std::size_t>(1, next)));
    }
    return x;
}

OutlierScreen filter_outliers(std::span<const Lot> lots, double k_sd, const CovariateOptions& options) {
    if (!(k_sd > 0.0)) throw ValidationError("outlier threshold must be positive");
    if (lots.size() < 2) throw ValidationError("outlier screening needs at least two lots");

    const std::size_t n = lots.size();
    std::vector<bool> drop(n, false);
    auto screen = [&](auto&& value_of) {
        std::vector<std::pair<std::size_t, double>> vals;
        for (std::size_t i = 0; i < n; ++i) {
            if (auto v = value_of(lots[i])) vals.emplace_back(i, *v);
        }
        if (vals.size() < 2) return;
        double mean = 0.0;
        for (const auto& [i, v] : vals) mean += v;
        mean /= static_cast<double>(vals.size());
        double ss = 0.0;
        for (const auto& [i, v] : vals) ss += (v - mean) * (v - mean);
        double sd = std::sqrt(ss / static_cast<double>(vals.size() - 1));
        if (!(sd > 0.0)) return;
        for (const auto& [i, v] : vals) {
            if (std::abs(v - mean) > k_sd * sd) drop[i] = true;
        }
    };
    screen([](const Lot& l) -> std::optional<double> { return std::log(l.opening_bid.major()); });
    screen([](const Lot& l) -> std::optional<double> { return std::log(l.area()); });
    screen([&](const Lot& l) -> std::optional<double> {
        if (!options.log1p_history && (!l.prev_price_per_sqin || *l.prev_price_per_sqin <= 0.0)) return std::nullopt;
        return history_covariate(l, options);
    });

    OutlierScreen out;
    for (std::size_t i = 0; i < n; ++i) {
        if (drop[i]) {
            out.removed_ids.push_back(lots[i].lot_id);
        } else {
            out.kept.push_back(lots[i]);
        }
    }
    return out;
}

SummaryStats summarize(std::span<const double> values) {
    if (values.empty()) throw ValidationError("summary of an empty sample");
    SummaryStats s;
    s.count = values.size();
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.count);
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = s.count > 1 ? std::sqrt(ss / static_cast<double>(s.count - 1)) : 0.0;
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    const std::size_t mid = s.count / 2;
    s.median = s.count % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    return s;
}

}  // namespace auctionfda
