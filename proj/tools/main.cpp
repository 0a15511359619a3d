#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "auctionlab/auction.hpp"
#include "auctionlab/baselines.hpp"
#include "auctionlab/errors.hpp"
#include "auctionlab/eval.hpp"
#include "auctionlab/manifest.hpp"
#include "auctionlab/market.hpp"
#include "auctionlab/version.hpp"

namespace {

using namespace auctionlab;
using nlohmann::json;

json load_json(const std::string& path) {
    const std::string text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw config_error(path + ": invalid JSON (" + std::string(e.what()) + ")");
    }
}

// A config file is either a bare market config or an envelope with
// "market" / "train" / "eval" sections.
market::MarketConfig market_section(const json& j) {
    if (j.is_object() && j.contains("market")) return market::market_config_from_json(j.at("market"));
    return market::market_config_from_json(j);
}

auction::TrainConfig train_section(const json& config_json, const std::string& train_path) {
    if (!train_path.empty()) {
        json tj = load_json(train_path);
        if (tj.is_object() && tj.contains("train")) tj = tj.at("train");
        return auction::train_config_from_json(tj);
    }
    if (config_json.is_object() && config_json.contains("train"))
        return auction::train_config_from_json(config_json.at("train"));
    return auction::TrainConfig{};
}

eval::EvalConfig eval_section(const json& config_json) {
    eval::EvalConfig cfg;
    if (!config_json.is_object() || !config_json.contains("eval")) return cfg;
    const json& e = config_json.at("eval");
    cfg.n_profiles = e.value("n_profiles", cfg.n_profiles);
    cfg.seed = e.value("seed", cfg.seed);
    cfg.grid_step = e.value("grid_step", cfg.grid_step);
    cfg.misreport_restarts = e.value("misreport_restarts", cfg.misreport_restarts);
    cfg.misreport_steps = e.value("misreport_steps", cfg.misreport_steps);
    cfg.misreport_lr = e.value("misreport_lr", cfg.misreport_lr);
    if (cfg.n_profiles < 1) throw config_error("eval section: n_profiles must be >= 1");
    return cfg;
}

json eval_config_to_json(const eval::EvalConfig& cfg) {
    return {{"n_profiles", cfg.n_profiles},
            {"seed", cfg.seed},
            {"grid_step", cfg.grid_step},
            {"misreport_restarts", cfg.misreport_restarts},
            {"misreport_steps", cfg.misreport_steps},
            {"misreport_lr", cfg.misreport_lr}};
}

void write_manifest(const std::string& path, const std::string& command,
                    const json& config_snapshot, const json& seeds,
                    const std::vector<std::string>& outputs) {
    // outputs are recorded relative to the manifest so a rerun into another
    // directory produces a byte-identical artifact set
    std::vector<std::string> names;
    names.reserve(outputs.size());
    for (const std::string& out : outputs)
        names.push_back(std::filesystem::path(out).filename().string());
    const RunManifest manifest = make_manifest(command, config_snapshot, seeds, names);
    write_text_file(path, manifest_to_json(manifest).dump(2) + "\n");
}

std::vector<std::size_t> parse_values(const std::string& values) {
    std::vector<std::size_t> out;
    std::size_t start = 0;
    while (start <= values.size()) {
        const std::size_t comma = values.find(',', start);
        const std::string token = values.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start);
        if (token.empty()) throw config_error("--values: empty entry in '" + values + "'");
        try {
            const long long parsed = std::stoll(token);
            if (parsed < 1) throw config_error("--values: entries must be positive integers");
            out.push_back(static_cast<std::size_t>(parsed));
        } catch (const std::invalid_argument&) {
            throw config_error("--values: '" + token + "' is not an integer");
        } catch (const std::out_of_range&) {
            throw config_error("--values: '" + token + "' is out of range");
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

int cmd_simulate(const std::string& config_path, std::size_t count, std::uint64_t seed,
                 bool seed_given, const std::string& out_path) {
    if (count < 1) throw config_error("simulate: --count must be >= 1");
    const json config_json = load_json(config_path);
    const market::MarketConfig cfg = market_section(config_json);
    const std::uint64_t dataset_seed = seed_given ? seed : cfg.seed;

    write_manifest(out_path + ".manifest.json", "simulate",
                   json{{"market", market_config_to_json(cfg)}, {"count", count}},
                   json{{"dataset", dataset_seed}}, {out_path});
    const std::vector<market::ProfileRecord> records =
        market::sample_records(cfg, count, dataset_seed);
    write_text_file(out_path, market::records_to_csv(records));
    std::cout << "wrote " << out_path << " (" << records.size() << " profiles x "
              << cfg.n_bidders() << " bidders)\n";
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& train_config_path,
              std::uint64_t seed, bool seed_given, const std::string& out_dir) {
    const json config_json = load_json(config_path);
    const market::MarketConfig market_cfg = market_section(config_json);
    auction::TrainConfig train_cfg = train_section(config_json, train_config_path);
    if (seed_given) train_cfg.seed = seed;

    const std::string model_path = out_dir + "/model.json";
    const std::string metrics_path = out_dir + "/metrics.csv";
    write_manifest(out_dir + "/manifest.json", "train",
                   json{{"market", market_config_to_json(market_cfg)},
                        {"train", auction::train_config_to_json(train_cfg)}},
                   json{{"train", train_cfg.seed}}, {model_path, metrics_path});

    const auction::TrainResult result = auction::train(market_cfg, train_cfg);
    write_text_file(model_path, auction::model_to_json(result.model, result.data_seed).dump(2) + "\n");
    write_text_file(metrics_path, auction::metrics_to_csv(result.metrics));

    const auction::BatchMetrics& last = result.metrics.back();
    std::cout << "trained " << train_cfg.iterations << " iterations; final revenue "
              << last.revenue << ", ir penalty " << last.ir_penalty << ", ic penalty "
              << last.ic_penalty << "\n"
              << "wrote " << model_path << " and " << metrics_path << "\n";
    return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& config_path, std::size_t count,
                 bool count_given, std::uint64_t seed, bool seed_given,
                 const std::string& out_path) {
    const json config_json = load_json(config_path);
    const market::MarketConfig market_cfg = market_section(config_json);
    eval::EvalConfig eval_cfg = eval_section(config_json);
    if (count_given) eval_cfg.n_profiles = count;
    if (seed_given) eval_cfg.seed = seed;
    if (eval_cfg.n_profiles < 1) throw config_error("evaluate: --count must be >= 1");

    std::uint64_t data_seed = 0;
    const auction::AuctionModel model = auction::model_from_json(load_json(model_path), &data_seed);
    if (model.n_bidders != market_cfg.n_bidders())
        throw config_error("evaluate: model expects " + std::to_string(model.n_bidders) +
                           " bidders but the market config has " +
                           std::to_string(market_cfg.n_bidders()));
    if (eval_cfg.seed == data_seed)
        throw config_error("evaluate: seed " + std::to_string(eval_cfg.seed) +
                           " is the model's training data stream; use a held-out seed");

    const std::vector<market::ValuationProfile> profiles =
        market::sample_profiles(market_cfg, eval_cfg.n_profiles, eval_cfg.seed);
    const eval::EvalReport report = eval::evaluate_model(model, profiles, eval_cfg);
    const std::string rendered = eval::report_to_json(report).dump(2) + "\n";
    if (!out_path.empty()) {
        write_manifest(out_path + ".manifest.json", "evaluate",
                       json{{"market", market_config_to_json(market_cfg)},
                            {"eval", eval_config_to_json(eval_cfg)},
                            {"model", model_path}},
                       json{{"eval", eval_cfg.seed}, {"model_data", data_seed}}, {out_path});
        write_text_file(out_path, rendered);
    }
    std::cout << rendered;
    return 0;
}

int cmd_baseline(const std::string& mechanism, const std::string& config_path, std::size_t count,
                 std::uint64_t seed, bool seed_given, const std::string& out_path) {
    if (count < 1) throw config_error("baseline: --count must be >= 1");
    const json config_json = load_json(config_path);
    const market::MarketConfig cfg = market_section(config_json);
    const double reserve = config_json.is_object() && config_json.contains("eval")
                               ? config_json.at("eval").value("myerson_reserve", 0.5)
                               : 0.5;

    MechanismFn mech;
    if (mechanism == "vcg") {
        mech = [&cfg](const std::vector<double>& bids) {
            return baselines::vcg_multiunit(bids, cfg.n_units);
        };
    } else if (mechanism == "second-price") {
        mech = [](const std::vector<double>& bids) { return baselines::second_price_single(bids); };
    } else if (mechanism == "first-price") {
        mech = [](const std::vector<double>& bids) { return baselines::first_price_single(bids); };
    } else if (mechanism == "myerson") {
        mech = [reserve](const std::vector<double>& bids) {
            return baselines::myerson_uniform_single(bids, reserve);
        };
    } else {
        throw config_error("baseline: unknown mechanism '" + mechanism +
                           "' (expected one of: vcg, second-price, first-price, myerson)");
    }

    const std::uint64_t sample_seed = seed_given ? seed : cfg.seed;
    double mean_revenue = 0.0;
    if (cfg.valuation_source == market::ValuationSource::uniform) {
        mean_revenue = baselines::expected_revenue_mc(
            mech, baselines::uniform_sampler(cfg.n_bidders()), count, sample_seed);
    } else {
        const std::vector<market::ValuationProfile> profiles =
            market::sample_profiles(cfg, count, sample_seed);
        for (const market::ValuationProfile& profile : profiles)
            mean_revenue += auction::revenue(mech(profile.values).payments);
        mean_revenue /= static_cast<double>(profiles.size());
    }

    json result = {{"mechanism", mechanism},
                   {"revenue", mean_revenue},
                   {"n_samples", count},
                   {"seed", sample_seed},
                   {"n_bidders", cfg.n_bidders()},
                   {"n_units", cfg.n_units}};
    if (mechanism == "myerson") result["reserve"] = reserve;
    const std::string rendered = result.dump(2) + "\n";
    if (!out_path.empty()) {
        write_manifest(out_path + ".manifest.json", "baseline",
                       json{{"market", market_config_to_json(cfg)}, {"mechanism", mechanism},
                            {"count", count}},
                       json{{"sample", sample_seed}}, {out_path});
        write_text_file(out_path, rendered);
    }
    std::cout << rendered;
    return 0;
}

int cmd_sweep(const std::string& kind, const std::string& config_path, const std::string& values,
              std::uint64_t seed, bool seed_given, const std::string& out_dir) {
    const json config_json = load_json(config_path);
    const market::MarketConfig market_cfg = market_section(config_json);
    auction::TrainConfig train_cfg = train_section(config_json, "");
    if (seed_given) train_cfg.seed = seed;
    const eval::EvalConfig eval_cfg = eval_section(config_json);

    std::vector<std::size_t> parsed;
    if (kind == "vsps" || kind == "apps") {
        if (values.empty()) throw config_error("sweep: --values is required for kind '" + kind + "'");
        parsed = parse_values(values);
    } else if (kind != "semcom") {
        throw config_error("sweep: unknown kind '" + kind + "' (expected one of: vsps, apps, semcom)");
    }

    const std::string csv_path = out_dir + "/sweep.csv";
    std::vector<std::string> outputs = {csv_path};
    if (kind == "semcom") outputs.push_back(out_dir + "/semcom.json");
    write_manifest(out_dir + "/manifest.json", "sweep",
                   json{{"market", market_config_to_json(market_cfg)},
                        {"train", auction::train_config_to_json(train_cfg)},
                        {"eval", eval_config_to_json(eval_cfg)},
                        {"kind", kind},
                        {"values", parsed}},
                   json{{"train", train_cfg.seed}, {"eval", eval_cfg.seed}}, outputs);

    std::vector<eval::SweepRow> rows;
    if (kind == "vsps") {
        rows = eval::sweep_vsps(market_cfg, parsed, train_cfg, eval_cfg);
    } else if (kind == "apps") {
        rows = eval::sweep_apps(market_cfg, parsed, train_cfg, eval_cfg);
    } else {
        const eval::SemcomComparison cmp = eval::compare_semcom(market_cfg, train_cfg, eval_cfg);
        rows.push_back(eval::SweepRow{1.0, "learned", cmp.with_semcom.mean_revenue,
                                      cmp.with_semcom.mean_ir_penalty, cmp.with_semcom.max_regret});
        rows.push_back(eval::SweepRow{0.0, "learned", cmp.without_semcom.mean_revenue,
                                      cmp.without_semcom.mean_ir_penalty,
                                      cmp.without_semcom.max_regret});
        write_text_file(out_dir + "/semcom.json",
                        json{{"with_semcom", eval::report_to_json(cmp.with_semcom)},
                             {"without_semcom", eval::report_to_json(cmp.without_semcom)}}
                                .dump(2) +
                            "\n");
    }
    write_text_file(csv_path, eval::sweep_to_csv(rows));
    std::cout << "wrote " << csv_path << " (" << rows.size() << " rows)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"learned-auction laboratory for edge computing markets"};
    app.require_subcommand(1);

    std::string config_path, train_config_path, out_path, mechanism, kind, values, model_path;
    std::size_t count = 0;
    std::uint64_t seed = 0;

    CLI::App* simulate = app.add_subcommand("simulate", "sample a valuation dataset to CSV");
    simulate->add_option("--config", config_path, "market config JSON")->required();
    CLI::Option* sim_count = simulate->add_option("--count", count, "number of profiles");
    CLI::Option* sim_seed = simulate->add_option("--seed", seed, "dataset seed");
    simulate->add_option("--out", out_path, "output CSV path")->required();

    CLI::App* train = app.add_subcommand("train", "train the two-network auction");
    train->add_option("--config", config_path, "market (+train) config JSON")->required();
    train->add_option("--train-config", train_config_path, "separate training config JSON");
    CLI::Option* train_seed = train->add_option("--seed", seed, "training seed override");
    train->add_option("--out", out_path, "output directory")->required();

    CLI::App* evaluate = app.add_subcommand("evaluate", "held-out metrics for a trained model");
    evaluate->add_option("model", model_path, "model JSON path")->required();
    evaluate->add_option("--config", config_path, "market config JSON")->required();
    CLI::Option* eval_count = evaluate->add_option("--count", count, "held-out profile count");
    CLI::Option* eval_seed = evaluate->add_option("--seed", seed, "held-out sampling seed");
    evaluate->add_option("--out", out_path, "also write the report JSON here");

    CLI::App* baseline = app.add_subcommand("baseline", "mean revenue of a classical mechanism");
    baseline->add_option("--mechanism", mechanism, "vcg | second-price | first-price | myerson")
        ->required();
    baseline->add_option("--config", config_path, "market config JSON")->required();
    baseline->add_option("--count", count, "number of sampled profiles")->default_val(100000);
    CLI::Option* base_seed = baseline->add_option("--seed", seed, "sampling seed");
    baseline->add_option("--out", out_path, "also write the revenue JSON here");

    CLI::App* sweep = app.add_subcommand("sweep", "train/evaluate across a swept parameter");
    sweep->add_option("--kind", kind, "vsps | apps | semcom")->required();
    sweep->add_option("--config", config_path, "market (+train/eval) config JSON")->required();
    sweep->add_option("--values", values, "comma-separated swept values (vsps/apps)");
    CLI::Option* sweep_seed = sweep->add_option("--seed", seed, "training seed override");
    sweep->add_option("--out", out_path, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(simulate)) {
            if (sim_count->count() == 0) throw config_error("simulate: --count is required");
            return cmd_simulate(config_path, count, seed, sim_seed->count() > 0, out_path);
        }
        if (app.got_subcommand(train))
            return cmd_train(config_path, train_config_path, seed, train_seed->count() > 0,
                             out_path);
        if (app.got_subcommand(evaluate))
            return cmd_evaluate(model_path, config_path, count, eval_count->count() > 0, seed,
                                eval_seed->count() > 0, out_path);
        if (app.got_subcommand(baseline))
            return cmd_baseline(mechanism, config_path, count, seed, base_seed->count() > 0,
                                out_path);
        if (app.got_subcommand(sweep))
            return cmd_sweep(kind, config_path, values, seed, sweep_seed->count() > 0, out_path);
        throw config_error("no subcommand selected");
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const training_error& e) {
        std::cerr << "training diverged: " << e.what() << "\n" << e.diagnostic_dump << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
