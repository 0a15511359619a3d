#include "auctionlab/auction.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <nlohmann/json.hpp>

#include "auctionlab/errors.hpp"
#include "auctionlab/format.hpp"
#include "auctionlab/rng.hpp"

namespace auctionlab::auction {

namespace {

constexpr int kModelFormatVersion = 1;

void check_model_bids(const AuctionModel& model, const std::vector<double>& bids) {
    if (bids.size() != model.n_bidders)
        throw dimension_error("auction: bid vector has " + std::to_string(bids.size()) +
                              " entries, model expects " + std::to_string(model.n_bidders));
}

/// Everything one evaluation of the model produces, kept around so the loss
/// can push gradients back through the heads without re-deriving it.
struct EvalCache {
    Matrix z;                      // n_bidders x n_units winning probabilities
    std::vector<double> dummy;     // per-unit probability the seller keeps it
    std::vector<double> unit_sum;  // S_n = sum_m z(n, m)
    std::vector<double> pay_raw;   // payment network output a_n (post-activation)
    std::vector<double> pay;       // final payments p_n
};

EvalCache eval_cache(const AuctionModel& model, const std::vector<double>& bids) {
    check_model_bids(model, bids);
    const std::size_t n = model.n_bidders;
    const std::size_t m = model.n_units;
    const std::vector<double> logits = nn::net_forward(model.alloc_net, bids);

    EvalCache cache;
    cache.z = Matrix(n, m);
    cache.dummy.resize(m);
    cache.unit_sum.assign(n, 0.0);
    for (std::size_t unit = 0; unit < m; ++unit) {
        const std::size_t base = unit * (n + 1);
        double peak = logits[base];
        for (std::size_t s = 1; s <= n; ++s) peak = std::max(peak, logits[base + s]);
        double denom = 0.0;
        for (std::size_t s = 0; s <= n; ++s) denom += std::exp(logits[base + s] - peak);
        for (std::size_t s = 0; s < n; ++s) {
            const double p = std::exp(logits[base + s] - peak) / denom;
            cache.z(s, unit) = p;
            cache.unit_sum[s] += p;
        }
        cache.dummy[unit] = std::exp(logits[base + n] - peak) / denom;
    }

    cache.pay_raw = nn::net_forward(model.pay_net, bids);
    cache.pay.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        cache.pay[i] = model.payment_mode == PaymentMode::penalty
                           ? cache.pay_raw[i]
                           : cache.pay_raw[i] * bids[i] * cache.unit_sum[i];
    return cache;
}

/// Pull an upstream on the winning probabilities (dL/dz, given per bidder
/// and shared across units via dz_rows) back through the per-unit softmax to
/// the allocation logits. dz_rows[n] = dL/dz(n, m) for every m.
std::vector<double> softmax_pullback_rows(const EvalCache& cache,
                                          const std::vector<double>& dz_rows) {
    const std::size_t n = dz_rows.size();
    const std::size_t m = cache.dummy.size();
    std::vector<double> upstream((n + 1) * m, 0.0);
    for (std::size_t unit = 0; unit < m; ++unit) {
        double dot = 0.0;
        for (std::size_t s = 0; s < n; ++s) dot += dz_rows[s] * cache.z(s, unit);
        const std::size_t base = unit * (n + 1);
        for (std::size_t s = 0; s < n; ++s)
            upstream[base + s] = cache.z(s, unit) * (dz_rows[s] - dot);
        upstream[base + n] = cache.dummy[unit] * (0.0 - dot);
    }
    return upstream;
}

/// Same, but the upstream touches a single bidder's row only.
std::vector<double> softmax_pullback_single(const EvalCache& cache, std::size_t bidder,
                                            double d_row, std::size_t n) {
    std::vector<double> dz_rows(n, 0.0);
    dz_rows[bidder] = d_row;
    return softmax_pullback_rows(cache, dz_rows);
}

void accumulate(nn::Gradients& into, const nn::Gradients& grads) {
    if (into.weights.empty()) {
        into.weights = grads.weights;
        into.biases = grads.biases;
        return;
    }
    for (std::size_t k = 0; k < grads.weights.size(); ++k) {
        for (std::size_t i = 0; i < grads.weights[k].data.size(); ++i)
            into.weights[k].data[i] += grads.weights[k].data[i];
        for (std::size_t i = 0; i < grads.biases[k].size(); ++i)
            into.biases[k][i] += grads.biases[k][i];
    }
}

/// Utility of `bidder` (true value profile[bidder]) when it alone reports
/// `bid`; optionally also its derivative with respect to the reported bid.
double misreport_utility(const AuctionModel& model, const std::vector<double>& profile,
                         std::size_t bidder, double bid, double* grad_out) {
    std::vector<double> input = profile;
    input[bidder] = bid;
    const EvalCache cache = eval_cache(model, input);
    const double value = profile[bidder];
    const double u = value * cache.unit_sum[bidder] - cache.pay[bidder];
    if (grad_out == nullptr) return u;

    const std::size_t n = model.n_bidders;
    // dS_bidder / d(input) through the softmax and the allocation network.
    const std::vector<double> alloc_up = softmax_pullback_single(cache, bidder, 1.0, n);
    const std::vector<double> ds = nn::net_input_gradient(model.alloc_net, input, alloc_up);
    std::vector<double> pay_up(n, 0.0);
    pay_up[bidder] = 1.0;
    const std::vector<double> da = nn::net_input_gradient(model.pay_net, input, pay_up);

    double dp_db;
    if (model.payment_mode == PaymentMode::penalty) {
        dp_db = da[bidder];
    } else {
        const double a = cache.pay_raw[bidder];
        const double s = cache.unit_sum[bidder];
        dp_db = da[bidder] * bid * s + a * s + a * bid * ds[bidder];
    }
    *grad_out = value * ds[bidder] - dp_db;
    return u;
}

struct AscentResult {
    double best_bid = 0.0;
    double best_utility = 0.0;
    double truthful_utility = 0.0;
};

/// Projected gradient ascent on a single misreport in [0, 1]; the best point
/// seen anywhere during the search wins. utility_fn(bid, grad) returns the
/// utility and, when grad != nullptr, writes d(utility)/d(bid).
template <typename UtilityFn>
AscentResult misreport_ascent(const UtilityFn& utility_fn, double truthful_bid,
                              const TrainConfig& cfg, Rng& rng) {
    AscentResult result;
    result.truthful_utility = utility_fn(truthful_bid, nullptr);
    result.best_bid = truthful_bid;
    result.best_utility = result.truthful_utility;

    const std::size_t restarts = std::max<std::size_t>(1, cfg.misreport_restarts);
    for (std::size_t r = 0; r < restarts; ++r) {
        double bid = r == 0 ? truthful_bid : rng.uniform01();
        for (std::size_t step = 0; step < cfg.misreport_steps; ++step) {
            double grad = 0.0;
            const double u = utility_fn(bid, &grad);
            if (u > result.best_utility) {
                result.best_utility = u;
                result.best_bid = bid;
            }
            bid = std::clamp(bid + cfg.misreport_lr * grad, 0.0, 1.0);
        }
        const double u = utility_fn(bid, nullptr);
        if (u > result.best_utility) {
            result.best_utility = u;
            result.best_bid = bid;
        }
    }
    return result;
}

AscentResult ascend_model(const AuctionModel& model, const std::vector<double>& profile,
                          std::size_t bidder, const TrainConfig& cfg, Rng& rng) {
    return misreport_ascent(
        [&](double bid, double* grad) {
            return misreport_utility(model, profile, bidder, bid, grad);
        },
        profile[bidder], cfg, rng);
}

/// Batch means feeding the augmented-Lagrangian terms, plus the per-element
/// pieces pass 2 needs for the gradient scales.
struct BatchEval {
    std::vector<EvalCache> truthful;                  // per profile
    std::vector<std::vector<double>> utilities;       // per profile, per bidder
    std::vector<std::vector<EvalCache>> misreported;  // per profile, per bidder
    std::vector<std::vector<double>> regrets;         // max(0, u' - u)
    double mean_revenue = 0.0;
    double mean_ir = 0.0;
    double mean_ic = 0.0;
};

BatchEval evaluate_batch(const AuctionModel& model, const Batch& batch,
                         const Misreports& misreports) {
    if (batch.empty()) throw config_error("loss: batch must be nonempty");
    const std::size_t b_count = batch.size();
    const std::size_t n = model.n_bidders;

    BatchEval ev;
    ev.truthful.reserve(b_count);
    ev.utilities.resize(b_count);
    ev.misreported.resize(b_count);
    ev.regrets.resize(b_count);

    double total_rev = 0.0, total_ir = 0.0, total_rgt = 0.0;
    for (std::size_t i = 0; i < b_count; ++i) {
        const std::vector<double>& v = batch[i];
        EvalCache cache = eval_cache(model, v);
        ev.utilities[i].resize(n);
        ev.regrets[i].resize(n);
        ev.misreported[i].reserve(n);
        for (std::size_t k = 0; k < n; ++k) {
            ev.utilities[i][k] = v[k] * cache.unit_sum[k] - cache.pay[k];
            total_rev += cache.pay[k];
            total_ir += std::max(0.0, -ev.utilities[i][k]);
        }
        for (std::size_t k = 0; k < n; ++k) {
            std::vector<double> input = v;
            input[k] = misreports.best_bid[i][k];
            EvalCache mis = eval_cache(model, input);
            const double u_mis = v[k] * mis.unit_sum[k] - mis.pay[k];
            ev.regrets[i][k] = std::max(0.0, u_mis - ev.utilities[i][k]);
            total_rgt += ev.regrets[i][k];
            ev.misreported[i].push_back(std::move(mis));
        }
        ev.truthful.push_back(std::move(cache));
    }
    const double batch_n = static_cast<double>(b_count);
    ev.mean_revenue = total_rev / batch_n;
    ev.mean_ir = total_ir / batch_n;
    ev.mean_ic = total_rgt / (batch_n * static_cast<double>(n));
    return ev;
}

double lagrangian(const BatchEval& ev, const LagrangeState& lagrange) {
    return -ev.mean_revenue + lagrange.lambda_ir * ev.mean_ir + lagrange.lambda_ic * ev.mean_ic +
           0.5 * lagrange.rho * (ev.mean_ir * ev.mean_ir + ev.mean_ic * ev.mean_ic);
}

}  // namespace

AuctionModel model_init(std::size_t n_bidders, std::size_t n_units,
                        const std::vector<std::size_t>& hidden_sizes,
                        nn::HiddenActivation hidden_activation, PaymentMode mode,
                        std::uint64_t seed) {
    if (n_bidders < 2) throw config_error("model_init: need at least 2 bidders");
    if (n_units < 1) throw config_error("model_init: need at least 1 unit");

    AuctionModel model;
    model.n_bidders = n_bidders;
    model.n_units = n_units;
    model.payment_mode = mode;

    std::vector<std::size_t> alloc_sizes{n_bidders};
    alloc_sizes.insert(alloc_sizes.end(), hidden_sizes.begin(), hidden_sizes.end());
    alloc_sizes.push_back((n_bidders + 1) * n_units);
    model.alloc_net = nn::net_init(alloc_sizes, hidden_activation,
                                   nn::OutputActivation::linear, derive_seed(seed, {0}));

    std::vector<std::size_t> pay_sizes{n_bidders};
    pay_sizes.insert(pay_sizes.end(), hidden_sizes.begin(), hidden_sizes.end());
    pay_sizes.push_back(n_bidders);
    const nn::OutputActivation pay_out = mode == PaymentMode::penalty
                                             ? nn::OutputActivation::softplus
                                             : nn::OutputActivation::sigmoid;
    model.pay_net = nn::net_init(pay_sizes, hidden_activation, pay_out, derive_seed(seed, {1}));
    return model;
}

Matrix allocation_probs(const AuctionModel& model, const std::vector<double>& bids) {
    return eval_cache(model, bids).z;
}

std::vector<double> payments(const AuctionModel& model, const std::vector<double>& bids,
                             const Matrix& alloc) {
    check_model_bids(model, bids);
    if (alloc.rows != model.n_bidders || alloc.cols != model.n_units)
        throw dimension_error("payments: allocation matrix shape mismatch");
    const std::vector<double> raw = nn::net_forward(model.pay_net, bids);
    std::vector<double> out(model.n_bidders);
    for (std::size_t n = 0; n < model.n_bidders; ++n) {
        if (model.payment_mode == PaymentMode::penalty) {
            out[n] = raw[n];
        } else {
            double units = 0.0;
            for (std::size_t m = 0; m < model.n_units; ++m) units += alloc(n, m);
            out[n] = raw[n] * bids[n] * units;
        }
    }
    return out;
}

Outcome run_auction(const AuctionModel& model, const std::vector<double>& bids) {
    EvalCache cache = eval_cache(model, bids);
    Outcome out;
    out.alloc = std::move(cache.z);
    out.payments = std::move(cache.pay);
    return out;
}

double utility(double value, const std::vector<double>& alloc_row, double payment) {
    double units = 0.0;
    for (double z : alloc_row) units += z;
    return value * units - payment;
}

double bidder_utility(double value, const Outcome& outcome, std::size_t bidder) {
    return value * outcome.units_won(bidder) - outcome.payments[bidder];
}

double revenue(const std::vector<double>& pays) {
    double total = 0.0;
    for (double p : pays) total += p;
    return total;
}

double ir_penalty(const std::vector<double>& utilities) {
    double total = 0.0;
    for (double u : utilities) total += std::max(0.0, -u);
    return total;
}

double estimate_regret(const AuctionModel& model, const std::vector<double>& profile,
                       std::size_t bidder, const TrainConfig& cfg, std::uint64_t seed) {
    check_model_bids(model, profile);
    if (bidder >= model.n_bidders) throw dimension_error("estimate_regret: bidder out of range");
    Rng rng{seed};
    const AscentResult res = ascend_model(model, profile, bidder, cfg, rng);
    return std::max(0.0, res.best_utility - res.truthful_utility);
}

double estimate_regret(const MechanismFn& mechanism, const std::vector<double>& profile,
                       std::size_t bidder, const TrainConfig& cfg, std::uint64_t seed) {
    if (bidder >= profile.size()) throw dimension_error("estimate_regret: bidder out of range");
    const auto utility_at = [&](double bid) {
        std::vector<double> input = profile;
        input[bidder] = bid;
        return bidder_utility(profile[bidder], mechanism(input), bidder);
    };
    // Fixed mechanisms expose no analytic input gradient; central differences
    // (clamped to the bid box) drive the ascent instead.
    const double h = 1e-4;
    const auto utility_fn = [&](double bid, double* grad) {
        const double u = utility_at(bid);
        if (grad != nullptr) {
            const double hi = std::min(1.0, bid + h);
            const double lo = std::max(0.0, bid - h);
            *grad = hi > lo ? (utility_at(hi) - utility_at(lo)) / (hi - lo) : 0.0;
        }
        return u;
    };
    Rng rng{seed};
    const AscentResult res = misreport_ascent(utility_fn, profile[bidder], cfg, rng);
    return std::max(0.0, res.best_utility - res.truthful_utility);
}

Misreports find_misreports(const AuctionModel& model, const Batch& batch, const TrainConfig& cfg,
                           std::uint64_t seed) {
    Misreports mis;
    mis.best_bid.resize(batch.size());
    mis.regret.resize(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        check_model_bids(model, batch[i]);
        mis.best_bid[i].resize(model.n_bidders);
        mis.regret[i].resize(model.n_bidders);
        for (std::size_t n = 0; n < model.n_bidders; ++n) {
            Rng rng{derive_seed(seed, {i, n})};
            const AscentResult res = ascend_model(model, batch[i], n, cfg, rng);
            mis.best_bid[i][n] = res.best_bid;
            mis.regret[i][n] = std::max(0.0, res.best_utility - res.truthful_utility);
        }
    }
    return mis;
}

double loss_value(const AuctionModel& model, const Batch& batch, const Misreports& misreports,
                  const LagrangeState& lagrange, const TrainConfig&) {
    const BatchEval ev = evaluate_batch(model, batch, misreports);
    return lagrangian(ev, lagrange);
}

LossResult loss_with_gradients(const AuctionModel& model, const Batch& batch,
                               const Misreports& misreports, const LagrangeState& lagrange,
                               const TrainConfig&) {
    const BatchEval ev = evaluate_batch(model, batch, misreports);
    const std::size_t b_count = batch.size();
    const std::size_t n = model.n_bidders;
    const double batch_n = static_cast<double>(b_count);

    LossResult result;
    result.value = lagrangian(ev, lagrange);
    result.metrics.revenue = ev.mean_revenue;
    result.metrics.ir_penalty = ev.mean_ir;
    result.metrics.ic_penalty = ev.mean_ic;
    result.metrics.loss = result.value;

    // Sensitivities of the loss to the batch-mean penalties.
    const double c_ir = lagrange.lambda_ir + lagrange.rho * ev.mean_ir;
    const double c_ic = lagrange.lambda_ic + lagrange.rho * ev.mean_ic;
    const double regret_weight = c_ic / (batch_n * static_cast<double>(n));

    for (std::size_t i = 0; i < b_count; ++i) {
        const std::vector<double>& v = batch[i];
        const EvalCache& cache = ev.truthful[i];

        // dL/du_n at the truthful point: IR hinge plus the -u side of the
        // regret hinge.
        std::vector<double> du(n, 0.0);
        std::vector<double> dp(n, -1.0 / batch_n);  // revenue term
        std::vector<double> ds(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            if (ev.utilities[i][k] < 0.0) du[k] += -c_ir / batch_n;
            if (ev.regrets[i][k] > 0.0) du[k] += -regret_weight;
            dp[k] += -du[k];
            ds[k] += du[k] * v[k];
        }
        std::vector<double> pay_up(n);
        for (std::size_t k = 0; k < n; ++k) {
            if (model.payment_mode == PaymentMode::penalty) {
                pay_up[k] = dp[k];
            } else {
                pay_up[k] = dp[k] * v[k] * cache.unit_sum[k];
                ds[k] += dp[k] * cache.pay_raw[k] * v[k];
            }
        }
        const std::vector<double> alloc_up = softmax_pullback_rows(cache, ds);
        accumulate(result.alloc_grads, nn::net_backprop(model.alloc_net, v, alloc_up));
        accumulate(result.pay_grads, nn::net_backprop(model.pay_net, v, pay_up));

        // Misreport side of each active regret hinge; the misreport itself is
        // a constant here.
        for (std::size_t k = 0; k < n; ++k) {
            if (ev.regrets[i][k] <= 0.0) continue;
            const EvalCache& mis = ev.misreported[i][k];
            const double bid = misreports.best_bid[i][k];
            std::vector<double> input = v;
            input[k] = bid;

            double d_s = regret_weight * v[k];
            const double d_p = -regret_weight;
            std::vector<double> mis_pay_up(n, 0.0);
            if (model.payment_mode == PaymentMode::penalty) {
                mis_pay_up[k] = d_p;
            } else {
                mis_pay_up[k] = d_p * bid * mis.unit_sum[k];
                d_s += d_p * mis.pay_raw[k] * bid;
            }
            const std::vector<double> mis_alloc_up = softmax_pullback_single(mis, k, d_s, n);
            accumulate(result.alloc_grads, nn::net_backprop(model.alloc_net, input, mis_alloc_up));
            accumulate(result.pay_grads, nn::net_backprop(model.pay_net, input, mis_pay_up));
        }
    }
    return result;
}

LossResult loss(const AuctionModel& model, const Batch& batch, const LagrangeState& lagrange,
                const TrainConfig& cfg, std::uint64_t seed) {
    const Misreports mis = find_misreports(model, batch, cfg, seed);
    return loss_with_gradients(model, batch, mis, lagrange, cfg);
}

void lagrange_update(LagrangeState& state, double ir_penalty_mean, double ic_penalty_mean) {
    if (ir_penalty_mean < 0.0 || ic_penalty_mean < 0.0)
        throw domain_error("lagrange_update: penalties must be nonnegative");
    state.lambda_ir += state.rho * ir_penalty_mean;
    state.lambda_ic += state.rho * ic_penalty_mean;
    state.rho *= state.rho_growth;
}

TrainResult train(const market::MarketConfig& market_cfg, const TrainConfig& cfg) {
    if (cfg.batch_size < 1 || cfg.iterations < 1 || cfg.dataset_size < 1)
        throw config_error("train: batch_size, iterations, dataset_size must be >= 1");

    const std::uint64_t data_seed = derive_seed(cfg.seed, {0});
    const std::uint64_t init_seed = derive_seed(cfg.seed, {1});
    const std::uint64_t batch_seed = derive_seed(cfg.seed, {2});
    const std::uint64_t misreport_seed = derive_seed(cfg.seed, {3});

    const std::vector<market::ValuationProfile> dataset =
        market::sample_profiles(market_cfg, cfg.dataset_size, data_seed);

    TrainResult result;
    result.data_seed = data_seed;
    result.model = model_init(market_cfg.n_bidders(), market_cfg.n_units, cfg.hidden_sizes,
                              cfg.hidden_activation, cfg.payment_mode, init_seed);
    result.lagrange = cfg.lagrange;

    nn::AdamState adam_alloc = nn::adam_init(result.model.alloc_net, cfg.learning_rate);
    nn::AdamState adam_pay = nn::adam_init(result.model.pay_net, cfg.learning_rate);

    Batch batch(cfg.batch_size);
    for (std::size_t t = 0; t < cfg.iterations; ++t) {
        Rng pick{derive_seed(batch_seed, {t})};
        for (std::size_t i = 0; i < cfg.batch_size; ++i)
            batch[i] = dataset[pick.below(dataset.size())].values;

        const LossResult res =
            loss(result.model, batch, result.lagrange, cfg, derive_seed(misreport_seed, {t}));
        if (!std::isfinite(res.value)) {
            nlohmann::json dump{{"iter", t},
                                {"loss", res.value},
                                {"revenue", res.metrics.revenue},
                                {"ir_penalty", res.metrics.ir_penalty},
                                {"ic_penalty", res.metrics.ic_penalty},
                                {"lambda_ir", result.lagrange.lambda_ir},
                                {"lambda_ic", result.lagrange.lambda_ic},
                                {"rho", result.lagrange.rho}};
            throw training_error("train: loss diverged to a non-finite value", dump.dump(2));
        }

        if (cfg.optimizer == Optimizer::adam) {
            nn::adam_step(adam_alloc, result.model.alloc_net, res.alloc_grads);
            nn::adam_step(adam_pay, result.model.pay_net, res.pay_grads);
        } else {
            nn::sgd_step(result.model.alloc_net, res.alloc_grads, cfg.learning_rate);
            nn::sgd_step(result.model.pay_net, res.pay_grads, cfg.learning_rate);
        }

        if (result.lagrange.update_period > 0 && (t + 1) % result.lagrange.update_period == 0)
            lagrange_update(result.lagrange, res.metrics.ir_penalty, res.metrics.ic_penalty);

        if (t % cfg.metrics_every == 0 || t + 1 == cfg.iterations) {
            BatchMetrics row = res.metrics;
            row.iter = t;
            result.metrics.push_back(row);
        }
    }
    return result;
}

nlohmann::json model_to_json(const AuctionModel& model, std::uint64_t data_seed) {
    return {{"format_version", kModelFormatVersion},
            {"n_bidders", model.n_bidders},
            {"n_units", model.n_units},
            {"payment_mode", payment_mode_name(model.payment_mode)},
            {"data_seed", data_seed},
            {"alloc_net", nn::net_to_json(model.alloc_net)},
            {"pay_net", nn::net_to_json(model.pay_net)}};
}

AuctionModel model_from_json(const nlohmann::json& j, std::uint64_t* data_seed) {
    if (!j.is_object()) throw config_error("model JSON: expected an object");
    const int version = j.value("format_version", 0);
    if (version != kModelFormatVersion)
        throw config_error("model JSON: unsupported format_version " + std::to_string(version));
    AuctionModel model;
    model.n_bidders = j.at("n_bidders").get<std::size_t>();
    model.n_units = j.at("n_units").get<std::size_t>();
    model.payment_mode = payment_mode_from_name(j.at("payment_mode").get<std::string>());
    model.alloc_net = nn::net_from_json(j.at("alloc_net"));
    model.pay_net = nn::net_from_json(j.at("pay_net"));
    if (model.alloc_net.input_size() != model.n_bidders ||
        model.alloc_net.output_size() != (model.n_bidders + 1) * model.n_units)
        throw config_error("model JSON: allocation network shape inconsistent with n_bidders/n_units");
    if (model.pay_net.input_size() != model.n_bidders ||
        model.pay_net.output_size() != model.n_bidders)
        throw config_error("model JSON: payment network shape inconsistent with n_bidders");
    if (data_seed != nullptr) *data_seed = j.value("data_seed", std::uint64_t{0});
    return model;
}

std::string metrics_to_csv(const std::vector<BatchMetrics>& metrics) {
    std::string out = "iter,revenue,ir_penalty,ic_penalty,loss\n";
    for (const BatchMetrics& row : metrics) {
        out += std::to_string(row.iter);
        out += ',';
        out += format_g9(row.revenue);
        out += ',';
        out += format_g9(row.ir_penalty);
        out += ',';
        out += format_g9(row.ic_penalty);
        out += ',';
        out += format_g9(row.loss);
        out += '\n';
    }
    return out;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw config_error("train config: expected a JSON object");
    TrainConfig cfg;
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.iterations = j.value("iterations", cfg.iterations);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    const std::string opt = j.value("optimizer", std::string("adam"));
    if (opt == "adam")
        cfg.optimizer = Optimizer::adam;
    else if (opt == "sgd")
        cfg.optimizer = Optimizer::sgd;
    else
        throw config_error("train config: optimizer must be 'adam' or 'sgd'");
    if (j.contains("hidden_sizes"))
        cfg.hidden_sizes = j.at("hidden_sizes").get<std::vector<std::size_t>>();
    cfg.hidden_activation =
        nn::hidden_activation_from_name(j.value("hidden_activation", std::string("tanh")));
    cfg.payment_mode = payment_mode_from_name(j.value("payment_mode", std::string("penalty")));
    cfg.misreport_restarts = j.value("misreport_restarts", cfg.misreport_restarts);
    cfg.misreport_steps = j.value("misreport_steps", cfg.misreport_steps);
    cfg.misreport_lr = j.value("misreport_lr", cfg.misreport_lr);
    if (j.contains("lagrange")) {
        const nlohmann::json& lj = j.at("lagrange");
        if (!lj.is_object()) throw config_error("train config: lagrange must be an object");
        cfg.lagrange.lambda_ir = lj.value("lambda_ir", cfg.lagrange.lambda_ir);
        cfg.lagrange.lambda_ic = lj.value("lambda_ic", cfg.lagrange.lambda_ic);
        cfg.lagrange.rho = lj.value("rho", cfg.lagrange.rho);
        cfg.lagrange.rho_growth = lj.value("rho_growth", cfg.lagrange.rho_growth);
        cfg.lagrange.update_period = lj.value("update_period", cfg.lagrange.update_period);
    }
    cfg.dataset_size = j.value("dataset_size", cfg.dataset_size);
    cfg.metrics_every = j.value("metrics_every", cfg.metrics_every);
    cfg.seed = j.value("seed", cfg.seed);
    if (cfg.batch_size < 1 || cfg.iterations < 1 || cfg.dataset_size < 1 ||
        cfg.metrics_every < 1)
        throw config_error("train config: counts must be >= 1");
    if (cfg.learning_rate <= 0.0 || cfg.misreport_lr <= 0.0)
        throw config_error("train config: learning rates must be positive");
    if (cfg.misreport_restarts < 1 || cfg.misreport_steps < 1)
        throw config_error("train config: misreport search needs >= 1 restart and step");
    if (cfg.lagrange.lambda_ir < 0.0 || cfg.lagrange.lambda_ic < 0.0 || cfg.lagrange.rho <= 0.0 ||
        cfg.lagrange.rho_growth < 1.0)
        throw config_error("train config: invalid lagrange settings");
    if (cfg.hidden_sizes.empty()) throw config_error("train config: hidden_sizes must be nonempty");
    return cfg;
}

nlohmann::json train_config_to_json(const TrainConfig& cfg) {
    return {{"batch_size", cfg.batch_size},
            {"iterations", cfg.iterations},
            {"learning_rate", cfg.learning_rate},
            {"optimizer", cfg.optimizer == Optimizer::adam ? "adam" : "sgd"},
            {"hidden_sizes", cfg.hidden_sizes},
            {"hidden_activation", nn::activation_name(cfg.hidden_activation)},
            {"payment_mode", payment_mode_name(cfg.payment_mode)},
            {"misreport_restarts", cfg.misreport_restarts},
            {"misreport_steps", cfg.misreport_steps},
            {"misreport_lr", cfg.misreport_lr},
            {"lagrange",
             {{"lambda_ir", cfg.lagrange.lambda_ir},
              {"lambda_ic", cfg.lagrange.lambda_ic},
              {"rho", cfg.lagrange.rho},
              {"rho_growth", cfg.lagrange.rho_growth},
              {"update_period", cfg.lagrange.update_period}}},
            {"dataset_size", cfg.dataset_size},
            {"metrics_every", cfg.metrics_every},
            {"seed", cfg.seed}};
}

std::string payment_mode_name(PaymentMode mode) {
    return mode == PaymentMode::penalty ? "penalty" : "structural";
}

PaymentMode payment_mode_from_name(const std::string& name) {
    if (name == "penalty") return PaymentMode::penalty;
    if (name == "structural") return PaymentMode::structural;
    throw config_error("unknown payment mode: " + name);
}

}  // namespace auctionlab::auction
