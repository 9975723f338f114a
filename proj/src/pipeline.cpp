#include "auctionfda/pipeline.hpp"

#include <exception>
#include <optional>

#include "auctionfda/parallel.hpp"

namespace auctionfda {

namespace {

struct Slot {
    std::optional<LotObservation> observation;
    std::string warning;
    std::string failure;
};

ObservationSet collect(std::vector<Slot>& slots) {
    ObservationSet set;
    for (auto& s : slots) {
        if (s.observation) set.observations.push_back(std::move(*s.observation));
        if (!s.warning.empty()) set.warnings.push_back(std::move(s.warning));
        if (!s.failure.empty()) set.failures.push_back(std::move(s.failure));
    }
    return set;
}

}  // namespace

ObservationSet build_observations(std::span<const Lot> lots, const BidHistory& bids,
                                  const AnalysisOptions& options) {
    options.spline.validate();
    std::vector<Slot> slots(lots.size());
    parallel_for(lots.size(), [&](std::size_t i) {
        const Lot& lot = lots[i];
        Slot& slot = slots[i];
        const auto lot_bids = bids.bids_for(lot.lot_id);
        if (lot_bids.empty()) {
            slot.warning = "lot " + lot.lot_id + " has no bids; skipped";
            return;
        }
        try {
            const ResponseVector y = prepare_response(lot, lot_bids, options.grid, options.prep);
            LotObservation obs;
            obs.lot_id = lot.lot_id;
            obs.curve = smooth_curve(y, options.grid, options.spline, options.smooth);
            obs.covariates = build_covariates(lot, lot_bids, options.grid, options.covariates);
            if (obs.curve.fit.ridge_fallback) {
                slot.warning = "lot " + lot.lot_id + ": normal equations needed a 1e-12 * trace ridge";
            }
            slot.observation = std::move(obs);
        } catch (const std::exception& e) {
            slot.failure = "lot " + lot.lot_id + ": " + e.what();
        }
    });
    return collect(slots);
}

ObservationSet build_observations(std::span<const Lot> lots, const BidHistory& bids,
                                  const std::map<std::string, CurveSamples>& curves,
                                  const AnalysisOptions& options) {
    const std::size_t n = options.grid.size();
    std::vector<Slot> slots(lots.size());
    parallel_for(lots.size(), [&](std::size_t i) {
        const Lot& lot = lots[i];
        Slot& slot = slots[i];
        auto it = curves.find(lot.lot_id);
        if (it == curves.end()) {
            slot.warning = "lot " + lot.lot_id + " has no curve; skipped";
            return;
        }
        const CurveSamples& c = it->second;
        if (c.values.size() != n || c.velocity.size() != n || c.acceleration.size() != n) {
            slot.failure = "lot " + lot.lot_id + ": curve has " + std::to_string(c.values.size()) +
                           " samples, grid has " + std::to_string(n);
            return;
        }
        try {
            LotObservation obs;
            obs.lot_id = lot.lot_id;
            obs.curve.lot_id = lot.lot_id;
            obs.curve.grid = options.grid;
            obs.curve.values = c.values;
            obs.curve.velocity = c.velocity;
            obs.curve.acceleration = c.acceleration;
            obs.covariates = build_covariates(lot, bids.bids_for(lot.lot_id), options.grid, options.covariates);
            slot.observation = std::move(obs);
        } catch (const std::exception& e) {
            slot.failure = "lot " + lot.lot_id + ": " + e.what();
        }
    });
    return collect(slots);
}

}  // namespace auctionfda
