#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "auctionlab/auction.hpp"
#include "auctionlab/baselines.hpp"
#include "auctionlab/errors.hpp"
#include "auctionlab/eval.hpp"
#include "auctionlab/market.hpp"
#include "doctest.h"

using namespace auctionlab;
using namespace auctionlab::auction;

namespace {

constexpr double kLn2 = 0.6931471805599453;

AuctionModel zero_model(std::size_t n, std::size_t m, PaymentMode mode) {
    AuctionModel model = model_init(n, m, {4}, nn::HiddenActivation::tanh, mode, 1);
    for (nn::DenseNet* net : {&model.alloc_net, &model.pay_net}) {
        for (Matrix& w : net->weights) std::fill(w.data.begin(), w.data.end(), 0.0);
        for (std::vector<double>& b : net->biases) std::fill(b.begin(), b.end(), 0.0);
    }
    return model;
}

TrainConfig tiny_search() {
    TrainConfig cfg;
    cfg.misreport_restarts = 3;
    cfg.misreport_steps = 25;
    cfg.misreport_lr = 0.1;
    return cfg;
}

std::vector<double> flatten_params(const AuctionModel& model) {
    std::vector<double> out;
    for (const nn::DenseNet* net : {&model.alloc_net, &model.pay_net}) {
        for (const Matrix& w : net->weights) out.insert(out.end(), w.data.begin(), w.data.end());
        for (const std::vector<double>& b : net->biases) out.insert(out.end(), b.begin(), b.end());
    }
    return out;
}

void unflatten_params(AuctionModel& model, const std::vector<double>& x) {
    std::size_t k = 0;
    for (nn::DenseNet* net : {&model.alloc_net, &model.pay_net}) {
        for (Matrix& w : net->weights)
            for (double& value : w.data) value = x[k++];
        for (std::vector<double>& b : net->biases)
            for (double& value : b) value = x[k++];
    }
    REQUIRE(k == x.size());
}

std::vector<double> flatten_grads(const LossResult& result) {
    std::vector<double> out;
    for (const nn::Gradients* g : {&result.alloc_grads, &result.pay_grads}) {
        for (const Matrix& w : g->weights) out.insert(out.end(), w.data.begin(), w.data.end());
        for (const std::vector<double>& b : g->biases) out.insert(out.end(), b.begin(), b.end());
    }
    return out;
}

bool close_rel(double a, double b, double rtol, double atol) {
    return std::abs(a - b) <= atol + rtol * std::max(std::abs(a), std::abs(b));
}

}  // namespace

TEST_CASE("allocation softmax spreads a zero-weight net uniformly") {
    const AuctionModel model = zero_model(4, 2, PaymentMode::penalty);
    const Matrix z = allocation_probs(model, {0.1, 0.5, 0.9, 0.3});
    REQUIRE(z.rows == 4);
    REQUIRE(z.cols == 2);
    for (std::size_t n = 0; n < 4; ++n)
        for (std::size_t m = 0; m < 2; ++m)
            CHECK(z(n, m) == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("allocation columns stay feasible for arbitrary models") {
    for (std::uint64_t seed : {3u, 4u, 5u}) {
        const AuctionModel model =
            model_init(3, 2, {8, 8}, nn::HiddenActivation::tanh, PaymentMode::penalty, seed);
        const Matrix z = allocation_probs(model, {0.2, 0.8, 0.5});
        for (std::size_t m = 0; m < z.cols; ++m) {
            double column = 0.0;
            for (std::size_t n = 0; n < z.rows; ++n) {
                CHECK(z(n, m) > 0.0);
                CHECK(z(n, m) < 1.0);
                column += z(n, m);
            }
            CHECK(column <= 1.0);
            CHECK(column > 0.0);
        }
    }
    const AuctionModel model = zero_model(2, 1, PaymentMode::penalty);
    CHECK_THROWS_AS(allocation_probs(model, {0.5}), dimension_error);
}

TEST_CASE("allocation matches a hand-computed softmax") {
    AuctionModel model = zero_model(2, 1, PaymentMode::penalty);
    // one hidden tanh unit: h = tanh(0.6 - 0.5*0.8 + 0.2), three logits on top
    model.alloc_net = nn::DenseNet{};
    model.alloc_net.layer_sizes = {2, 1, 3};
    model.alloc_net.hidden_activation = nn::HiddenActivation::tanh;
    model.alloc_net.output_activation = nn::OutputActivation::linear;
    Matrix w0(1, 2);
    w0(0, 0) = 1.0;
    w0(0, 1) = -0.5;
    Matrix w1(3, 1);
    w1(0, 0) = 1.0;
    w1(1, 0) = 0.5;
    w1(2, 0) = -0.25;
    model.alloc_net.weights = {w0, w1};
    model.alloc_net.biases = {{0.2}, {0.1, -0.2, 0.3}};

    const double h = std::tanh(1.0 * 0.6 - 0.5 * 0.8 + 0.2);
    const double o0 = 1.0 * h + 0.1;
    const double o1 = 0.5 * h - 0.2;
    const double o2 = -0.25 * h + 0.3;
    const double denom = std::exp(o0) + std::exp(o1) + std::exp(o2);

    const Matrix z = allocation_probs(model, {0.6, 0.8});
    CHECK(z(0, 0) == doctest::Approx(std::exp(o0) / denom).epsilon(1e-12));
    CHECK(z(1, 0) == doctest::Approx(std::exp(o1) / denom).epsilon(1e-12));
    CHECK(z(0, 0) + z(1, 0) == doctest::Approx(1.0 - std::exp(o2) / denom).epsilon(1e-12));
}

TEST_CASE("payment heads follow their mode") {
    const AuctionModel penalty = zero_model(2, 1, PaymentMode::penalty);
    const Matrix z = allocation_probs(penalty, {0.4, 0.7});
    const std::vector<double> p = payments(penalty, {0.4, 0.7}, z);
    REQUIRE(p.size() == 2);
    CHECK(p[0] == doctest::Approx(kLn2).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(kLn2).epsilon(1e-14));

    const AuctionModel structural = zero_model(2, 2, PaymentMode::structural);
    Matrix alloc(2, 2);
    alloc(0, 0) = 0.1;
    alloc(0, 1) = 0.3;  // row sum 0.4
    alloc(1, 0) = 0.25;
    alloc(1, 1) = 0.25;
    const std::vector<double> q = payments(structural, {1.0, 0.0}, alloc);
    CHECK(q[0] == doctest::Approx(0.2).epsilon(1e-14));  // sigmoid(0)*1.0*0.4
    CHECK(q[1] == 0.0);                                  // zero bid pays nothing

    CHECK_THROWS_AS(payments(penalty, {0.4}, z), dimension_error);
}

TEST_CASE("run_auction bundles allocation and payments") {
    const AuctionModel model = zero_model(3, 2, PaymentMode::penalty);
    const Outcome out = run_auction(model, {0.2, 0.5, 0.8});
    REQUIRE(out.alloc.rows == 3);
    REQUIRE(out.alloc.cols == 2);
    REQUIRE(out.payments.size() == 3);
    CHECK(out.units_won(1) == doctest::Approx(0.5).epsilon(1e-14));  // 2 units * 1/4
    CHECK(out.payments[2] == doctest::Approx(kLn2).epsilon(1e-14));
}

TEST_CASE("utility, revenue, and ir penalty follow their definitions") {
    CHECK(utility(0.5, {0.8, 0.9}, 0.6) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(utility(0.5, {0.4}, 0.2) == doctest::Approx(0.0));
    CHECK(utility(0.0, {0.9, 0.9}, 0.3) == doctest::Approx(-0.3));

    CHECK(revenue({0.2, 0.3, 0.0}) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(revenue({0.0, 0.0}) == 0.0);
    CHECK(revenue({0.3, 0.2, 0.0}) == doctest::Approx(revenue({0.2, 0.3, 0.0})).epsilon(1e-14));

    CHECK(ir_penalty({0.1, 0.2}) == 0.0);
    CHECK(ir_penalty({-0.2, 0.3}) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(ir_penalty({-0.1, -0.1}) == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("a bid-blind model admits no profitable misreport") {
    const AuctionModel model = zero_model(2, 1, PaymentMode::penalty);
    const TrainConfig cfg = tiny_search();
    CHECK(estimate_regret(model, {0.9, 0.6}, 0, cfg, 7) <= 1e-9);
    CHECK(estimate_regret(model, {0.9, 0.6}, 1, cfg, 7) <= 1e-9);
}

TEST_CASE("ascent regret never exceeds the grid oracle by more than a step") {
    const TrainConfig cfg = tiny_search();
    const std::vector<double> profile = {0.85, 0.35, 0.6};
    int positive = 0;
    for (std::uint64_t seed : {11u, 12u, 13u, 14u}) {
        for (PaymentMode mode : {PaymentMode::penalty, PaymentMode::structural}) {
            const AuctionModel model =
                model_init(3, 2, {6}, nn::HiddenActivation::tanh, mode, seed);
            for (std::size_t n = 0; n < 3; ++n) {
                const double est = estimate_regret(model, profile, n, cfg, seed + n);
                const double grid =
                    eval::exact_regret_grid(eval::as_mechanism(model), profile, n, 1e-3);
                CHECK(est >= 0.0);
                CHECK(est <= grid + 1e-3);
                if (grid > 1e-4) ++positive;
            }
        }
    }
    CHECK(positive > 0);  // the property must be exercised on nontrivial regret
}

TEST_CASE("ascent finds the first-price underbid") {
    const MechanismFn first_price = [](const std::vector<double>& bids) {
        return baselines::first_price_single(bids);
    };
    TrainConfig cfg = tiny_search();
    cfg.misreport_restarts = 6;
    cfg.misreport_steps = 60;
    // truthful utility is 0; bidding just above 0.4 nets almost 0.4
    const double est = estimate_regret(first_price, {0.8, 0.4}, 0, cfg, 3);
    CHECK(est >= 0.35);
    CHECK(est <= 0.401);
}

TEST_CASE("loss composes the augmented lagrangian from batch means") {
    const AuctionModel model = zero_model(2, 1, PaymentMode::penalty);
    const Batch batch = {{0.9, 0.6}};
    const TrainConfig cfg = tiny_search();
    const Misreports none = find_misreports(model, batch, cfg, 5);

    LagrangeState lag;
    lag.lambda_ir = 1.0;
    lag.lambda_ic = 1.0;
    lag.rho = 2.0;
    // revenue 2*ln2; u = (0.3 - ln2, 0.2 - ln2) both negative; regret 0:
    // L = -2ln2 + (2ln2 - 0.5) + (2/2)(2ln2 - 0.5)^2, frozen independently.
    const LossResult result = loss_with_gradients(model, batch, none, lag, cfg);
    CHECK(result.value == doctest::Approx(0.285517694552915).epsilon(1e-12));
    CHECK(result.metrics.revenue == doctest::Approx(2.0 * kLn2).epsilon(1e-12));
    CHECK(result.metrics.ir_penalty == doctest::Approx(2.0 * kLn2 - 0.5).epsilon(1e-12));
    CHECK(result.metrics.ic_penalty <= 1e-9);
    CHECK(loss_value(model, batch, none, lag, cfg) ==
          doctest::Approx(result.value).epsilon(1e-14));

    // with multipliers off the loss is pure negated revenue
    LagrangeState off;
    off.lambda_ir = 0.0;
    off.lambda_ic = 0.0;
    off.rho = 0.0;
    CHECK(loss_value(model, batch, none, off, cfg) ==
          doctest::Approx(-2.0 * kLn2).epsilon(1e-12));
}

TEST_CASE("loss gradients match finite differences with misreports frozen") {
    for (PaymentMode mode : {PaymentMode::penalty, PaymentMode::structural}) {
        AuctionModel model = model_init(2, 1, {4}, nn::HiddenActivation::tanh, mode, 42);
        const Batch batch = {{0.9, 0.55}, {0.3, 0.7}, {0.62, 0.41}};
        TrainConfig cfg = tiny_search();
        cfg.payment_mode = mode;
        LagrangeState lag;
        lag.lambda_ir = 1.0;
        lag.lambda_ic = 1.5;
        lag.rho = 2.0;

        const Misreports frozen = find_misreports(model, batch, cfg, 9);
        const LossResult result = loss_with_gradients(model, batch, frozen, lag, cfg);
        const std::vector<double> analytic = flatten_grads(result);

        std::vector<double> x = flatten_params(model);
        REQUIRE(analytic.size() == x.size());
        const double h = 1e-5;
        for (std::size_t i = 0; i < x.size(); ++i) {
            AuctionModel probe = model;
            std::vector<double> xp = x;
            xp[i] = x[i] + h;
            unflatten_params(probe, xp);
            const double up = loss_value(probe, batch, frozen, lag, cfg);
            xp[i] = x[i] - h;
            unflatten_params(probe, xp);
            const double down = loss_value(probe, batch, frozen, lag, cfg);
            const double fd = (up - down) / (2.0 * h);
            CHECK(close_rel(analytic[i], fd, 1e-4, 1e-7));
        }
    }
}

TEST_CASE("one-call loss equals search-then-differentiate") {
    const AuctionModel model =
        model_init(2, 1, {4}, nn::HiddenActivation::tanh, PaymentMode::penalty, 8);
    const Batch batch = {{0.5, 0.8}, {0.9, 0.1}};
    const TrainConfig cfg = tiny_search();
    const LagrangeState lag;

    const LossResult direct = loss(model, batch, lag, cfg, 21);
    const Misreports frozen = find_misreports(model, batch, cfg, 21);
    const LossResult staged = loss_with_gradients(model, batch, frozen, lag, cfg);
    CHECK(direct.value == staged.value);
    CHECK(direct.metrics.ic_penalty == staged.metrics.ic_penalty);
}

TEST_CASE("multiplier updates accumulate scaled penalties") {
    LagrangeState state;
    state.lambda_ir = 1.0;
    state.lambda_ic = 1.0;
    state.rho = 2.0;

    LagrangeState untouched = state;
    lagrange_update(untouched, 0.0, 0.0);
    CHECK(untouched.lambda_ir == 1.0);
    CHECK(untouched.lambda_ic == 1.0);
    CHECK(untouched.rho == 2.0);

    lagrange_update(state, 0.1, 0.0);
    CHECK(state.lambda_ir == doctest::Approx(1.2).epsilon(1e-14));
    CHECK(state.lambda_ic == 1.0);
    CHECK(state.lambda_ir >= 0.0);

    LagrangeState growing;
    growing.rho = 1.0;
    growing.rho_growth = 2.0;
    lagrange_update(growing, 0.0, 0.5);
    CHECK(growing.lambda_ic == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(growing.rho == 2.0);
}

TEST_CASE("a bid-blind model treats bidders anonymously") {
    const AuctionModel model = zero_model(2, 1, PaymentMode::structural);
    const Outcome ab = run_auction(model, {0.9, 0.4});
    const Outcome ba = run_auction(model, {0.4, 0.9});
    CHECK(ab.payments[0] == ba.payments[1]);
    CHECK(ab.payments[1] == ba.payments[0]);
    CHECK(ab.units_won(0) == ba.units_won(1));
}

TEST_CASE("model json round-trips bitwise with its envelope") {
    const AuctionModel model =
        model_init(3, 2, {5, 4}, nn::HiddenActivation::relu, PaymentMode::structural, 77);
    const nlohmann::json j = model_to_json(model, 1234);
    CHECK(j.at("n_bidders") == 3);
    CHECK(j.at("n_units") == 2);
    CHECK(j.at("payment_mode") == "structural");
    CHECK(j.at("data_seed") == 1234);

    std::uint64_t data_seed = 0;
    const AuctionModel back = model_from_json(j, &data_seed);
    CHECK(data_seed == 1234);
    CHECK(back.n_bidders == model.n_bidders);
    CHECK(back.n_units == model.n_units);
    CHECK(back.payment_mode == model.payment_mode);
    REQUIRE(back.alloc_net.weights.size() == model.alloc_net.weights.size());
    for (std::size_t k = 0; k < model.alloc_net.weights.size(); ++k)
        CHECK(back.alloc_net.weights[k].data == model.alloc_net.weights[k].data);
    for (std::size_t k = 0; k < model.pay_net.biases.size(); ++k)
        CHECK(back.pay_net.biases[k] == model.pay_net.biases[k]);

    nlohmann::json wrong_width = j;
    wrong_width["n_units"] = 3;  // alloc head no longer matches (N+1)*M
    CHECK_THROWS_AS(model_from_json(wrong_width, nullptr), config_error);

    nlohmann::json bad_mode = j;
    bad_mode["payment_mode"] = "deferred";
    CHECK_THROWS_AS(model_from_json(bad_mode, nullptr), config_error);
}

TEST_CASE("payment heads are wired to the configured mode at init") {
    const AuctionModel penalty =
        model_init(2, 1, {4}, nn::HiddenActivation::tanh, PaymentMode::penalty, 3);
    CHECK(penalty.pay_net.output_activation == nn::OutputActivation::softplus);
    CHECK(penalty.alloc_net.output_activation == nn::OutputActivation::linear);
    CHECK(penalty.alloc_net.layer_sizes.back() == 3);  // (N+1)*M
    CHECK(penalty.pay_net.layer_sizes.back() == 2);

    const AuctionModel structural =
        model_init(2, 1, {4}, nn::HiddenActivation::tanh, PaymentMode::structural, 3);
    CHECK(structural.pay_net.output_activation == nn::OutputActivation::sigmoid);
}

TEST_CASE("training is deterministic and reports on the configured cadence") {
    market::MarketConfig market;
    market.valuation_source = market::ValuationSource::uniform;
    market.n_bidders_uniform = 2;
    market.n_units = 1;

    TrainConfig cfg;
    cfg.batch_size = 8;
    cfg.iterations = 12;
    cfg.learning_rate = 5e-3;
    cfg.hidden_sizes = {4};
    cfg.misreport_restarts = 1;
    cfg.misreport_steps = 3;
    cfg.dataset_size = 32;
    cfg.metrics_every = 5;
    cfg.seed = 6;

    const TrainResult a = train(market, cfg);
    const TrainResult b = train(market, cfg);
    CHECK(flatten_params(a.model) == flatten_params(b.model));
    REQUIRE(a.metrics.size() == b.metrics.size());
    for (std::size_t i = 0; i < a.metrics.size(); ++i) {
        CHECK(a.metrics[i].loss == b.metrics[i].loss);
        CHECK(a.metrics[i].revenue == b.metrics[i].revenue);
    }

    // cadence: every 5th iteration plus the final one
    REQUIRE(a.metrics.size() == 4);
    CHECK(a.metrics[0].iter == 0);
    CHECK(a.metrics[1].iter == 5);
    CHECK(a.metrics[2].iter == 10);
    CHECK(a.metrics[3].iter == 11);

    CHECK(a.data_seed != cfg.seed);  // derived stream, not the raw config seed

    const std::string csv = metrics_to_csv(a.metrics);
    CHECK(csv.rfind("iter,revenue,ir_penalty,ic_penalty,loss\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("divergent training aborts with a diagnostic") {
    market::MarketConfig market;
    market.valuation_source = market::ValuationSource::uniform;
    market.n_bidders_uniform = 2;
    market.n_units = 1;

    TrainConfig cfg;
    cfg.batch_size = 4;
    cfg.iterations = 6;
    cfg.optimizer = Optimizer::sgd;
    cfg.learning_rate = 1e308;  // payments overshoot to ~1e307 on the first step
    cfg.hidden_sizes = {4};
    cfg.misreport_restarts = 1;
    cfg.misreport_steps = 2;
    cfg.dataset_size = 16;
    cfg.seed = 2;
    // with the constraint terms switched off the revenue term pushes payments
    // up unopposed, and the quadratic rationality penalty overflows next step
    cfg.lagrange.lambda_ir = 0.0;
    cfg.lagrange.lambda_ic = 0.0;
    cfg.lagrange.rho = 1e-9;
    CHECK_THROWS_AS(train(market, cfg), training_error);
}

TEST_CASE("train config json parses and validates") {
    const nlohmann::json j = {{"batch_size", 32},
                              {"iterations", 500},
                              {"learning_rate", 0.002},
                              {"optimizer", "adam"},
                              {"hidden_sizes", {16, 16}},
                              {"hidden_activation", "tanh"},
                              {"payment_mode", "structural"},
                              {"misreport_restarts", 4},
                              {"misreport_steps", 20},
                              {"misreport_lr", 0.05},
                              {"lagrange",
                               {{"lambda_ir", 1.0},
                                {"lambda_ic", 1.0},
                                {"rho", 1.0},
                                {"rho_growth", 1.05},
                                {"update_period", 50}}},
                              {"dataset_size", 1024},
                              {"metrics_every", 25},
                              {"seed", 3}};
    const TrainConfig cfg = train_config_from_json(j);
    CHECK(cfg.batch_size == 32);
    CHECK(cfg.iterations == 500);
    CHECK(cfg.learning_rate == 0.002);
    CHECK(cfg.payment_mode == PaymentMode::structural);
    CHECK(cfg.hidden_sizes == std::vector<std::size_t>{16, 16});
    CHECK(cfg.lagrange.rho_growth == 1.05);
    CHECK(cfg.lagrange.update_period == 50);
    CHECK(cfg.seed == 3);

    const TrainConfig back = train_config_from_json(train_config_to_json(cfg));
    CHECK(back.batch_size == cfg.batch_size);
    CHECK(back.misreport_lr == cfg.misreport_lr);
    CHECK(back.payment_mode == cfg.payment_mode);

    nlohmann::json bad = j;
    bad["batch_size"] = 0;
    CHECK_THROWS_AS(train_config_from_json(bad), config_error);
    bad = j;
    bad["payment_mode"] = "escrow";
    CHECK_THROWS_AS(train_config_from_json(bad), config_error);
    bad = j;
    bad["learning_rate"] = -0.1;
    CHECK_THROWS_AS(train_config_from_json(bad), config_error);
    bad = j;
    bad["optimizer"] = "newton";
    CHECK_THROWS_AS(train_config_from_json(bad), config_error);
}
