#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "auctionlab/auction.hpp"
#include "auctionlab/market.hpp"
#include "auctionlab/outcome.hpp"

namespace auctionlab::eval {

/// Held-out metrics of a mechanism over a profile set.
struct EvalReport {
    double mean_revenue = 0.0;
    double mean_ir_penalty = 0.0;
    double max_regret = 0.0;
    double mean_regret = 0.0;
    std::size_t n_profiles = 0;
};

/// Evaluation settings: held-out set size/seed, regret-grid resolution, and
/// the ascent budget for the gradient-based regret estimator.
struct EvalConfig {
    std::size_t n_profiles = 512;
    std::uint64_t seed = 99;
    double grid_step = 1e-3;
    std::size_t misreport_restarts = 10;
    std::size_t misreport_steps = 50;
    double misreport_lr = 0.1;
};

/// One swept cell: parameter value, mechanism tag, and its held-out metrics.
struct SweepRow {
    double param_value = 0.0;
    std::string mechanism;
    double revenue = 0.0;
    double ir_penalty = 0.0;
    double max_regret = 0.0;
};

struct SemcomComparison {
    EvalReport with_semcom;
    EvalReport without_semcom;
};

/// Exhaustive regret oracle: sweeps bidder's misreport over the grid
/// {0, step, 2*step, ..., 1} with all other bids truthful and returns the
/// best utility gain (clamped at 0).
double exact_regret_grid(const MechanismFn& mechanism, const std::vector<double>& profile,
                         std::size_t bidder, double grid_step);

/// Treat a learned model as a plain bids -> outcome mechanism.
MechanismFn as_mechanism(const auction::AuctionModel& model);

/// Truthful-play revenue/IR plus per-bidder regret; the regret column takes
/// the larger of the gradient-ascent estimate and the grid oracle.
EvalReport evaluate_model(const auction::AuctionModel& model,
                          const std::vector<market::ValuationProfile>& profiles,
                          const EvalConfig& cfg);

/// Mean VCG revenue and IR penalty over the same profiles (regret is zero:
/// VCG is dominant-strategy incentive compatible).
SweepRow vcg_row(const std::vector<market::ValuationProfile>& profiles, std::size_t n_units,
                 double param_value);

/// Train/evaluate per bidder count; emits a learned-auction row and a VCG
/// row for each N. The first N VSP configs of the base scenario are kept.
std::vector<SweepRow> sweep_vsps(const market::MarketConfig& base,
                                 const std::vector<std::size_t>& n_vsps,
                                 const auction::TrainConfig& train_cfg, const EvalConfig& eval_cfg);

/// Same sweep over the number of applications per VSP (more applications
/// tighten the minimum requirement, raising valuations).
std::vector<SweepRow> sweep_apps(const market::MarketConfig& base,
                                 const std::vector<std::size_t>& n_apps,
                                 const auction::TrainConfig& train_cfg, const EvalConfig& eval_cfg);

/// Paired-seed comparison of the scenario with and without semantic payload
/// compression; everything except the payload bits is shared.
SemcomComparison compare_semcom(const market::MarketConfig& base,
                                const auction::TrainConfig& train_cfg,
                                const EvalConfig& eval_cfg);

/// CSV with header `param,mechanism,revenue,ir_penalty,max_regret`.
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

nlohmann::json report_to_json(const EvalReport& report);

}  // namespace auctionlab::eval
