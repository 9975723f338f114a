#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "auctionfda/auction_data.hpp"
#include "auctionfda/curve_prep.hpp"
#include "auctionfda/funcreg.hpp"
#include "auctionfda/grid.hpp"
#include "auctionfda/pspline.hpp"

namespace auctionfda {

struct AnalysisOptions {
    Grid grid;
    PrepOptions prep;
    SplineConfig spline = SplineConfig::equally_spaced();
    SmoothOptions smooth;
    CovariateOptions covariates;
};

struct ObservationSet {
    std::vector<LotObservation> observations;  // catalog order
    std::vector<std::string> warnings;         // lots skipped for lack of bids
    std::vector<std::string> failures;         // lots whose preparation or fit threw
};

/// Prepares, smooths and builds covariates for every catalog lot. Lots are
/// processed in parallel and collected in catalog order.
ObservationSet build_observations(std::span<const Lot> lots, const BidHistory& bids,
                                  const AnalysisOptions& options);

/// Grid samples of an already smoothed curve, as stored in curves.csv.
struct CurveSamples {
    std::vector<double> values;
    std::vector<double> velocity;
    std::vector<double> acceleration;
};

/// As above, but the response curves come from previously exported samples
/// rather than a fresh fit.
ObservationSet build_observations(std::span<const Lot> lots, const BidHistory& bids,
                                  const std::map<std::string, CurveSamples>& curves,
                                  const AnalysisOptions& options);

}  // namespace auctionfda
