#include "auctionfda/curve_prep.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "auctionfda/error.hpp"
#include "auctionfda/io.hpp"

namespace auctionfda {

Grid::Grid(std::size_t n) {
    if (n < 2) throw ValidationError("grid needs at least two points");
    points_.resize(n);
    const double last = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) points_[i] = static_cast<double>(i) / last;
}

std::string_view to_string(ResponseScale scale) {
    return scale == ResponseScale::fraction_of_final ? "fraction" : "logprice";
}

std::string_view to_string(InterpolationSpace space) { return space == InterpolationSpace::log ? "log" : "raw"; }

ResponseScale parse_response_scale(std::string_view token) {
    std::string t = io::to_lower(token);
    if (t == "fraction" || t == "fraction_of_final") return ResponseScale::fraction_of_final;
    if (t == "logprice" || t == "log_price") return ResponseScale::log_price;
    throw std::invalid_argument("unknown response scale '" + std::string(token) + "'");
}

InterpolationSpace parse_interpolation_space(std::string_view token) {
    std::string t = io::to_lower(token);
    if (t == "log") return InterpolationSpace::log;
    if (t == "raw") return InterpolationSpace::raw;
    throw std::invalid_argument("unknown interpolation space '" + std::string(token) + "'");
}

std::vector<TimedValue> normalize_times(std::span<const BidRecord> bids, double open, double close) {
    if (!(open < close)) throw ValidationError("auction window must have open < close");
    const double span = close - open;
    std::vector<TimedValue> out;
    out.reserve(bids.size());
    for (const auto& bid : bids) {
        if (!(bid.timestamp >= open && bid.timestamp <= close)) {
            throw ValidationError("bid by " + bid.bidder_id + " in lot " + bid.lot_id + " lies outside the auction window");
        }
        out.push_back({(bid.timestamp - open) / span, bid.amount.major()});
    }
    return out;
}

std::vector<TimedValue> normalize_times(std::span<const BidRecord> bids, const Lot& lot) {
    return normalize_times(bids, 0.0, lot.duration());
}

std::vector<double> log_transform(std::span<const double> amounts) {
    std::vector<double> out;
    out.reserve(amounts.size());
    for (double a : amounts) {
        if (!(a > 0.0)) throw ValidationError("log transform of a non-positive amount");
        out.push_back(std::log(a));
    }
    return out;
}

std::vector<double> resample_to_grid(std::span<const TimedValue> pairs, const Grid& grid) {
    if (pairs.empty()) throw ValidationError("cannot resample an empty sequence");
    for (std::size_t i = 1; i < pairs.size(); ++i) {
        if (pairs[i].t < pairs[i - 1].t) throw ValidationError("resample input is not sorted by time");
    }
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid[i];
        // first pair strictly after t
        auto hi = std::upper_bound(pairs.begin(), pairs.end(), t,
                                   [](double v, const TimedValue& p) { return v < p.t; });
        if (hi == pairs.begin()) {
            out[i] = pairs.front().value;
        } else if (hi == pairs.end()) {
            out[i] = pairs.back().value;
        } else {
            const auto& a = *(hi - 1);
            const auto& b = *hi;
            const double w = (t - a.t) / (b.t - a.t);
            const double v = a.value + w * (b.value - a.value);
            out[i] = std::clamp(v, std::min(a.value, b.value), std::max(a.value, b.value));
        }
    }
    return out;
}

ResponseVector scale_to_fraction(std::string lot_id, std::span<const double> curve, double final_value) {
    if (final_value == 0.0 || !std::isfinite(final_value)) {
        throw ValidationError("lot " + lot_id + ": cannot scale by a zero or non-finite final value");
    }
    if (!(final_value > 0.0)) throw ValidationError("lot " + lot_id + ": final value must be positive");
    ResponseVector out;
    out.lot_id = std::move(lot_id);
    out.kind = ResponseScale::fraction_of_final;
    out.final_log_price = final_value;
    out.values.reserve(curve.size());
    for (double v : curve) {
        if (!std::isfinite(v)) throw ValidationError("lot " + out.lot_id + ": non-finite curve value");
        out.values.push_back(v / final_value);
    }
    return out;
}

ResponseVector prepare_response(const Lot& lot, std::span<const BidRecord> bids, const Grid& grid,
                                const PrepOptions& options) {
    if (bids.empty()) throw ValidationError("lot " + lot.lot_id + " has no bids");
    auto pairs = normalize_times(bids, lot);

    std::vector<double> log_curve;
    if (options.space == InterpolationSpace::log) {
        for (auto& p : pairs) {
            if (!(p.value > 0.0)) throw ValidationError("lot " + lot.lot_id + ": non-positive bid");
            p.value = std::log(p.value);
        }
        log_curve = resample_to_grid(pairs, grid);
    } else {
        log_curve = log_transform(resample_to_grid(pairs, grid));
    }

    const double final_log = log_curve.back();
    if (options.response == ResponseScale::log_price) {
        ResponseVector out;
        out.lot_id = lot.lot_id;
        out.values = std::move(log_curve);
        out.kind = ResponseScale::log_price;
        out.final_log_price = final_log;
        return out;
    }
    return scale_to_fraction(lot.lot_id, log_curve, final_log);
}

}  // namespace auctionfda
