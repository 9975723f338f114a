#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "auctionfda/auction_data.hpp"
#include "auctionfda/grid.hpp"

namespace auctionfda {

enum class ResponseScale { fraction_of_final, log_price };

/// Whether raw bid amounts are interpolated before or after the log transform.
enum class InterpolationSpace { log, raw };

std::string_view to_string(ResponseScale scale);
std::string_view to_string(InterpolationSpace space);
ResponseScale parse_response_scale(std::string_view token);
InterpolationSpace parse_interpolation_space(std::string_view token);

struct TimedValue {
    double t = 0.0;
    double value = 0.0;
};

struct ResponseVector {
    std::string lot_id;
    std::vector<double> values;
    ResponseScale kind = ResponseScale::log_price;
    double final_log_price = 0.0;
};

/// Maps timestamps in [open, close] to [0, 1]; order is preserved.
std::vector<TimedValue> normalize_times(std::span<const BidRecord> bids, double open, double close);

/// Uses the lot's window (bid timestamps are offsets from its open).
std::vector<TimedValue> normalize_times(std::span<const BidRecord> bids, const Lot& lot);

std::vector<double> log_transform(std::span<const double> amounts);

/// Piecewise-linear interpolation through the pairs, held constant before the
/// first and after the last pair. Pairs must be sorted by t; for tied t the
/// last pair wins.
std::vector<double> resample_to_grid(std::span<const TimedValue> pairs, const Grid& grid);

ResponseVector scale_to_fraction(std::string lot_id, std::span<const double> curve, double final_value);

struct PrepOptions {
    ResponseScale response = ResponseScale::fraction_of_final;
    InterpolationSpace space = InterpolationSpace::log;
};

/// normalize -> log -> resample -> scale, with the log/resample order set by
/// options.space.
ResponseVector prepare_response(const Lot& lot, std::span<const BidRecord> bids, const Grid& grid,
                                const PrepOptions& options = {});

}  // namespace auctionfda
