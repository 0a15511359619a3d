#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "auctionlab/auction.hpp"
#include "auctionlab/baselines.hpp"
#include "auctionlab/errors.hpp"
#include "auctionlab/eval.hpp"
#include "auctionlab/market.hpp"
#include "auctionlab/version.hpp"

namespace py = pybind11;
using namespace auctionlab;
using nlohmann::json;

namespace {

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw config_error(std::string("invalid json: ") + e.what());
    }
}

py::list matrix_rows(const Matrix& m) {
    py::list rows;
    for (std::size_t r = 0; r < m.rows; ++r) {
        py::list row;
        for (std::size_t c = 0; c < m.cols; ++c) row.append(m(r, c));
        rows.append(row);
    }
    return rows;
}

py::dict outcome_dict(const Outcome& outcome) {
    py::dict out;
    out["alloc"] = matrix_rows(outcome.alloc);
    out["payments"] = py::cast(outcome.payments);
    return out;
}

py::dict report_dict(const eval::EvalReport& report) {
    py::dict out;
    out["mean_revenue"] = report.mean_revenue;
    out["mean_ir_penalty"] = report.mean_ir_penalty;
    out["max_regret"] = report.max_regret;
    out["mean_regret"] = report.mean_regret;
    out["n_profiles"] = report.n_profiles;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "learned-auction laboratory: latency-driven valuations, trained auction "
              "networks, and classical baselines";

    py::register_exception<config_error>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<dimension_error>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<domain_error>(m, "DomainError", PyExc_ValueError);
    py::register_exception<training_error>(m, "TrainingError", PyExc_RuntimeError);

    m.def("version", [] { return std::string(kVersionTag); }, "library version tag");

    m.def(
        "semantic_payload_bits",
        [](double raw_bits, double box_ratio, double text_bits) {
            market::MarketConfig cfg;
            cfg.semcom_enabled = true;
            cfg.semcom_box_ratio = box_ratio;
            cfg.semcom_text_bits = text_bits;
            return market::semantic_payload_bits(raw_bits, cfg);
        },
        py::arg("raw_bits"), py::arg("box_ratio") = 0.65 / 3.59, py::arg("text_bits") = 448.0,
        "bits transmitted for one raw image after semantic extraction");

    m.def(
        "sample_profiles",
        [](const std::string& market_json, std::size_t count, std::uint64_t seed) {
            const market::MarketConfig cfg = market::market_config_from_json(parse_json(market_json));
            py::list out;
            for (const market::ValuationProfile& p : market::sample_profiles(cfg, count, seed))
                out.append(py::cast(p.values));
            return out;
        },
        py::arg("market_json"), py::arg("count"), py::arg("seed"),
        "deterministic valuation profiles for a market config (json string)");

    m.def(
        "sample_records_csv",
        [](const std::string& market_json, std::size_t count, std::uint64_t seed) {
            const market::MarketConfig cfg = market::market_config_from_json(parse_json(market_json));
            return market::records_to_csv(market::sample_records(cfg, count, seed));
        },
        py::arg("market_json"), py::arg("count"), py::arg("seed"),
        "sampled dataset as csv (profile_id,vsp_id,valuation,t_total_s,t_req_s)");

    m.def(
        "train",
        [](const std::string& market_json, const std::string& train_json) {
            const market::MarketConfig mcfg =
                market::market_config_from_json(parse_json(market_json));
            const auction::TrainConfig tcfg = auction::train_config_from_json(parse_json(train_json));
            const auction::TrainResult result = auction::train(mcfg, tcfg);
            py::dict out;
            out["model_json"] = auction::model_to_json(result.model, result.data_seed).dump();
            out["metrics_csv"] = auction::metrics_to_csv(result.metrics);
            out["data_seed"] = result.data_seed;
            py::dict final;
            const auction::BatchMetrics& last = result.metrics.back();
            final["iter"] = last.iter;
            final["revenue"] = last.revenue;
            final["ir_penalty"] = last.ir_penalty;
            final["ic_penalty"] = last.ic_penalty;
            final["loss"] = last.loss;
            out["final"] = final;
            return out;
        },
        py::arg("market_json"), py::arg("train_json"),
        "train the two-network auction; returns model json, metrics csv, and final metrics");

    m.def(
        "run_auction",
        [](const std::string& model_json, const std::vector<double>& bids) {
            const auction::AuctionModel model = auction::model_from_json(parse_json(model_json));
            return outcome_dict(auction::run_auction(model, bids));
        },
        py::arg("model_json"), py::arg("bids"),
        "allocation probabilities and payments of a trained model on a bid vector");

    m.def(
        "vcg",
        [](const std::vector<double>& bids, std::size_t m_units, std::size_t unit_cap) {
            return outcome_dict(baselines::vcg_multiunit(bids, m_units, unit_cap));
        },
        py::arg("bids"), py::arg("m_units") = 1, py::arg("unit_cap") = 0,
        "multi-unit vcg outcome");

    m.def(
        "second_price",
        [](const std::vector<double>& bids) { return outcome_dict(baselines::second_price_single(bids)); },
        py::arg("bids"));

    m.def(
        "first_price",
        [](const std::vector<double>& bids) { return outcome_dict(baselines::first_price_single(bids)); },
        py::arg("bids"));

    m.def(
        "myerson",
        [](const std::vector<double>& bids, double reserve) {
            return outcome_dict(baselines::myerson_uniform_single(bids, reserve));
        },
        py::arg("bids"), py::arg("reserve") = 0.5,
        "single-item auction with a reserve price");

    m.def(
        "expected_revenue_mc",
        [](const std::string& mechanism, std::size_t n_bidders, std::size_t n_samples,
           std::uint64_t seed, double reserve, std::size_t m_units) {
            MechanismFn fn;
            if (mechanism == "vcg")
                fn = [m_units](const std::vector<double>& bids) {
                    return baselines::vcg_multiunit(bids, m_units);
                };
            else if (mechanism == "second-price")
                fn = [](const std::vector<double>& bids) {
                    return baselines::second_price_single(bids);
                };
            else if (mechanism == "first-price")
                fn = [](const std::vector<double>& bids) {
                    return baselines::first_price_single(bids);
                };
            else if (mechanism == "myerson")
                fn = [reserve](const std::vector<double>& bids) {
                    return baselines::myerson_uniform_single(bids, reserve);
                };
            else
                throw config_error("unknown mechanism '" + mechanism +
                                   "' (expected one of: vcg, second-price, first-price, myerson)");
            return baselines::expected_revenue_mc(fn, baselines::uniform_sampler(n_bidders),
                                                  n_samples, seed);
        },
        py::arg("mechanism"), py::arg("n_bidders"), py::arg("n_samples"), py::arg("seed"),
        py::arg("reserve") = 0.5, py::arg("m_units") = 1,
        "mean truthful revenue over i.i.d. uniform values");

    m.def(
        "exact_regret_grid",
        [](const std::string& model_json, const std::vector<double>& profile, std::size_t bidder,
           double grid_step) {
            const auction::AuctionModel model = auction::model_from_json(parse_json(model_json));
            const MechanismFn mech = eval::as_mechanism(model);
            return eval::exact_regret_grid(mech, profile, bidder, grid_step);
        },
        py::arg("model_json"), py::arg("profile"), py::arg("bidder"), py::arg("grid_step") = 1e-3,
        "best utility gain for one bidder over the misreport grid");

    m.def(
        "evaluate",
        [](const std::string& model_json, const std::string& market_json, std::size_t n_profiles,
           std::uint64_t seed, double grid_step, std::size_t misreport_restarts,
           std::size_t misreport_steps, double misreport_lr) {
            const auction::AuctionModel model = auction::model_from_json(parse_json(model_json));
            const market::MarketConfig mcfg =
                market::market_config_from_json(parse_json(market_json));
            eval::EvalConfig ecfg;
            ecfg.n_profiles = n_profiles;
            ecfg.seed = seed;
            ecfg.grid_step = grid_step;
            ecfg.misreport_restarts = misreport_restarts;
            ecfg.misreport_steps = misreport_steps;
            ecfg.misreport_lr = misreport_lr;
            const std::vector<market::ValuationProfile> profiles =
                market::sample_profiles(mcfg, n_profiles, seed);
            return report_dict(eval::evaluate_model(model, profiles, ecfg));
        },
        py::arg("model_json"), py::arg("market_json"), py::arg("n_profiles") = 256,
        py::arg("seed") = 99, py::arg("grid_step") = 1e-3, py::arg("misreport_restarts") = 5,
        py::arg("misreport_steps") = 30, py::arg("misreport_lr") = 0.1,
        "held-out revenue / rationality / regret report for a trained model");
}
