#include "auctionlab/eval.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "auctionlab/baselines.hpp"
#include "auctionlab/errors.hpp"
#include "auctionlab/format.hpp"
#include "auctionlab/rng.hpp"

namespace auctionlab::eval {

namespace {

auction::TrainConfig ascent_settings(const EvalConfig& cfg) {
    auction::TrainConfig tc;
    tc.misreport_restarts = cfg.misreport_restarts;
    tc.misreport_steps = cfg.misreport_steps;
    tc.misreport_lr = cfg.misreport_lr;
    return tc;
}

market::MarketConfig with_vsp_count(const market::MarketConfig& base, std::size_t n) {
    market::MarketConfig variant = base;
    if (base.valuation_source == market::ValuationSource::uniform) {
        variant.n_bidders_uniform = n;
        return variant;
    }
    if (n < 2 || n > base.vsps.size())
        throw config_error("sweep_vsps: requested bidder count outside the configured scenario");
    variant.vsps.assign(base.vsps.begin(), base.vsps.begin() + static_cast<std::ptrdiff_t>(n));
    return variant;
}

market::MarketConfig with_app_count(const market::MarketConfig& base, std::size_t n_apps) {
    if (base.valuation_source == market::ValuationSource::uniform)
        throw config_error("sweep_apps: needs the latency valuation model");
    if (n_apps < 1) throw config_error("sweep_apps: need at least one application");
    market::MarketConfig variant = base;
    // Only the count matters; requirement values are resampled per profile.
    for (market::VspConfig& vsp : variant.vsps) vsp.app_latency_reqs_s.assign(n_apps, 2.0);
    return variant;
}

/// One sweep cell: train on the variant, evaluate on a held-out set, and
/// pair it with VCG on the same profiles.
void run_cell(const market::MarketConfig& variant, const auction::TrainConfig& train_cfg,
              const EvalConfig& eval_cfg, double param_value, std::uint64_t cell_tag,
              std::vector<SweepRow>& rows) {
    auction::TrainConfig cell_cfg = train_cfg;
    cell_cfg.seed = derive_seed(train_cfg.seed, {cell_tag});
    const auction::TrainResult trained = auction::train(variant, cell_cfg);

    const std::vector<market::ValuationProfile> held_out =
        market::sample_profiles(variant, eval_cfg.n_profiles, derive_seed(eval_cfg.seed, {cell_tag}));

    const EvalReport report = evaluate_model(trained.model, held_out, eval_cfg);
    rows.push_back(SweepRow{param_value, "learned", report.mean_revenue, report.mean_ir_penalty,
                            report.max_regret});
    rows.push_back(vcg_row(held_out, variant.n_units, param_value));
}

}  // namespace

double exact_regret_grid(const MechanismFn& mechanism, const std::vector<double>& profile,
                         std::size_t bidder, double grid_step) {
    if (!(grid_step > 0.0 && grid_step <= 0.5))
        throw config_error("exact_regret_grid: grid_step must lie in (0, 0.5]");
    if (bidder >= profile.size())
        throw dimension_error("exact_regret_grid: bidder out of range");

    const double truthful =
        auction::bidder_utility(profile[bidder], mechanism(profile), bidder);
    const std::size_t points = static_cast<std::size_t>(std::llround(1.0 / grid_step));
    double best = truthful;
    std::vector<double> input = profile;
    for (std::size_t k = 0; k <= points; ++k) {
        input[bidder] = std::min(1.0, static_cast<double>(k) * grid_step);
        best = std::max(best,
                        auction::bidder_utility(profile[bidder], mechanism(input), bidder));
    }
    return std::max(0.0, best - truthful);
}

MechanismFn as_mechanism(const auction::AuctionModel& model) {
    return [&model](const std::vector<double>& bids) { return auction::run_auction(model, bids); };
}

EvalReport evaluate_model(const auction::AuctionModel& model,
                          const std::vector<market::ValuationProfile>& profiles,
                          const EvalConfig& cfg) {
    if (profiles.empty()) throw config_error("evaluate_model: need at least one profile");
    const auction::TrainConfig ascent = ascent_settings(cfg);
    const MechanismFn mech = as_mechanism(model);

    EvalReport report;
    report.n_profiles = profiles.size();
    double total_regret = 0.0;
    std::size_t regret_count = 0;
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        const std::vector<double>& v = profiles[i].values;
        const Outcome out = auction::run_auction(model, v);
        report.mean_revenue += auction::revenue(out.payments);
        std::vector<double> utilities(v.size());
        for (std::size_t n = 0; n < v.size(); ++n)
            utilities[n] = auction::bidder_utility(v[n], out, n);
        report.mean_ir_penalty += auction::ir_penalty(utilities);
        for (std::size_t n = 0; n < v.size(); ++n) {
            const double est =
                auction::estimate_regret(model, v, n, ascent, derive_seed(cfg.seed, {i, n}));
            const double grid = exact_regret_grid(mech, v, n, cfg.grid_step);
            const double regret = std::max(est, grid);
            total_regret += regret;
            regret_count += 1;
            report.max_regret = std::max(report.max_regret, regret);
        }
    }
    report.mean_revenue /= static_cast<double>(profiles.size());
    report.mean_ir_penalty /= static_cast<double>(profiles.size());
    report.mean_regret = total_regret / static_cast<double>(regret_count);
    return report;
}

SweepRow vcg_row(const std::vector<market::ValuationProfile>& profiles, std::size_t n_units,
                 double param_value) {
    if (profiles.empty()) throw config_error("vcg_row: need at least one profile");
    double total_rev = 0.0, total_ir = 0.0;
    for (const market::ValuationProfile& profile : profiles) {
        const Outcome out = baselines::vcg_multiunit(profile.values, n_units);
        total_rev += auction::revenue(out.payments);
        std::vector<double> utilities(profile.values.size());
        for (std::size_t n = 0; n < profile.values.size(); ++n)
            utilities[n] = auction::bidder_utility(profile.values[n], out, n);
        total_ir += auction::ir_penalty(utilities);
    }
    const double count = static_cast<double>(profiles.size());
    return SweepRow{param_value, "vcg", total_rev / count, total_ir / count, 0.0};
}

std::vector<SweepRow> sweep_vsps(const market::MarketConfig& base,
                                 const std::vector<std::size_t>& n_vsps,
                                 const auction::TrainConfig& train_cfg,
                                 const EvalConfig& eval_cfg) {
    if (n_vsps.empty()) throw config_error("sweep_vsps: empty value list");
    std::vector<SweepRow> rows;
    for (std::size_t n : n_vsps)
        run_cell(with_vsp_count(base, n), train_cfg, eval_cfg, static_cast<double>(n), n, rows);
    return rows;
}

std::vector<SweepRow> sweep_apps(const market::MarketConfig& base,
                                 const std::vector<std::size_t>& n_apps,
                                 const auction::TrainConfig& train_cfg,
                                 const EvalConfig& eval_cfg) {
    if (n_apps.empty()) throw config_error("sweep_apps: empty value list");
    std::vector<SweepRow> rows;
    for (std::size_t a : n_apps)
        run_cell(with_app_count(base, a), train_cfg, eval_cfg, static_cast<double>(a), a, rows);
    return rows;
}

SemcomComparison compare_semcom(const market::MarketConfig& base,
                                const auction::TrainConfig& train_cfg,
                                const EvalConfig& eval_cfg) {
    SemcomComparison cmp;
    for (const bool semcom : {true, false}) {
        market::MarketConfig variant = base;
        variant.semcom_enabled = semcom;
        const auction::TrainResult trained = auction::train(variant, train_cfg);
        const std::vector<market::ValuationProfile> held_out =
            market::sample_profiles(variant, eval_cfg.n_profiles, eval_cfg.seed);
        const EvalReport report = evaluate_model(trained.model, held_out, eval_cfg);
        (semcom ? cmp.with_semcom : cmp.without_semcom) = report;
    }
    return cmp;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::string out = "param,mechanism,revenue,ir_penalty,max_regret\n";
    for (const SweepRow& row : rows) {
        out += format_g9(row.param_value);
        out += ',';
        out += row.mechanism;
        out += ',';
        out += format_g9(row.revenue);
        out += ',';
        out += format_g9(row.ir_penalty);
        out += ',';
        out += format_g9(row.max_regret);
        out += '\n';
    }
    return out;
}

nlohmann::json report_to_json(const EvalReport& report) {
    return {{"mean_revenue", report.mean_revenue},
            {"mean_ir_penalty", report.mean_ir_penalty},
            {"max_regret", report.max_regret},
            {"mean_regret", report.mean_regret},
            {"n_profiles", report.n_profiles}};
}

}  // namespace auctionlab::eval
