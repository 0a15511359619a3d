#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "auctionlab/market.hpp"
#include "auctionlab/nn.hpp"
#include "auctionlab/outcome.hpp"

namespace auctionlab::auction {

/// How payments come out of the payment network:
///  - penalty: p_n = softplus(o_n); individual rationality is enforced only
///    through the loss penalty, so payments may overshoot during training.
///  - structural: p_n = sigmoid(o_n) * b_n * (units won); never exceeds the
///    reported value of the allocation, so truthful utility is >= 0 by
///    construction.
enum class PaymentMode { penalty, structural };

enum class Optimizer { adam, sgd };

/// The learned auction: an allocation network mapping N bids to (N+1)*M
/// per-unit logits (slot N is the "keep the unit" dummy) and a payment
/// network mapping N bids to N payment head outputs.
struct AuctionModel {
    std::size_t n_bidders = 0;
    std::size_t n_units = 0;
    PaymentMode payment_mode = PaymentMode::penalty;
    nn::DenseNet alloc_net;
    nn::DenseNet pay_net;
};

/// Multipliers and penalty coefficient of the augmented-Lagrangian loss.
struct LagrangeState {
    double lambda_ir = 1.0;
    double lambda_ic = 1.0;
    double rho = 1.0;
    double rho_growth = 1.0;  // multiplies rho at every multiplier update
    std::size_t update_period = 100;
};

struct TrainConfig {
    std::size_t batch_size = 64;
    std::size_t iterations = 2000;
    double learning_rate = 1e-3;
    Optimizer optimizer = Optimizer::adam;
    std::vector<std::size_t> hidden_sizes = {100, 100};
    nn::HiddenActivation hidden_activation = nn::HiddenActivation::tanh;
    PaymentMode payment_mode = PaymentMode::penalty;
    std::size_t misreport_restarts = 10;
    std::size_t misreport_steps = 50;
    double misreport_lr = 0.1;
    LagrangeState lagrange;  // initial multiplier state
    std::size_t dataset_size = 16384;
    std::size_t metrics_every = 10;
    std::uint64_t seed = 1;
};

struct BatchMetrics {
    std::size_t iter = 0;
    double revenue = 0.0;
    double ir_penalty = 0.0;
    double ic_penalty = 0.0;  // mean per-bidder estimated regret
    double loss = 0.0;
};

/// A batch of truthful valuation profiles.
using Batch = std::vector<std::vector<double>>;

/// Best misreport found per (profile, bidder) and the utility gain it
/// achieves; frozen while the loss is differentiated.
struct Misreports {
    std::vector<std::vector<double>> best_bid;
    std::vector<std::vector<double>> regret;
};

struct LossResult {
    double value = 0.0;
    BatchMetrics metrics;
    nn::Gradients alloc_grads;
    nn::Gradients pay_grads;
};

struct TrainResult {
    AuctionModel model;
    std::vector<BatchMetrics> metrics;
    LagrangeState lagrange;
    std::uint64_t data_seed = 0;  // evaluation must not reuse this stream
};

AuctionModel model_init(std::size_t n_bidders, std::size_t n_units,
                        const std::vector<std::size_t>& hidden_sizes,
                        nn::HiddenActivation hidden_activation, PaymentMode mode,
                        std::uint64_t seed);

/// Per-unit softmax over N bidders plus the dummy slot; returns the N x M
/// matrix of winning probabilities (column sums <= 1).
Matrix allocation_probs(const AuctionModel& model, const std::vector<double>& bids);

/// Payment head on top of the payment network output (see PaymentMode).
std::vector<double> payments(const AuctionModel& model, const std::vector<double>& bids,
                             const Matrix& alloc);

Outcome run_auction(const AuctionModel& model, const std::vector<double>& bids);

/// u_n = v_n * (units won) - p_n.
double utility(double value, const std::vector<double>& alloc_row, double payment);

/// Same, reading bidder n's row out of an outcome.
double bidder_utility(double value, const Outcome& outcome, std::size_t bidder);

double revenue(const std::vector<double>& payments);

/// Sum of individual-rationality violations: sum_n max(0, -u_n).
double ir_penalty(const std::vector<double>& utilities);

/// Regret of bidder n: best utility gain over misreports in [0, 1], found by
/// misreport_restarts runs of misreport_steps gradient-ascent steps (input
/// gradients from backprop), restart 0 starting from the truthful bid.
double estimate_regret(const AuctionModel& model, const std::vector<double>& profile,
                       std::size_t bidder, const TrainConfig& cfg, std::uint64_t seed);

/// Same search against an arbitrary fixed mechanism, using central
/// differences for the ascent direction.
double estimate_regret(const MechanismFn& mechanism, const std::vector<double>& profile,
                       std::size_t bidder, const TrainConfig& cfg, std::uint64_t seed);

/// Best misreports for every (profile, bidder) in the batch.
Misreports find_misreports(const AuctionModel& model, const Batch& batch, const TrainConfig& cfg,
                           std::uint64_t seed);

/// Augmented-Lagrangian loss with the misreports held fixed:
/// L = -mean revenue + lambda_ir * P_ir + lambda_ic * P_ic
///     + rho/2 * (P_ir^2 + P_ic^2).
double loss_value(const AuctionModel& model, const Batch& batch, const Misreports& misreports,
                  const LagrangeState& lagrange, const TrainConfig& cfg);

/// Loss plus exact gradients for both networks (misreports frozen).
LossResult loss_with_gradients(const AuctionModel& model, const Batch& batch,
                               const Misreports& misreports, const LagrangeState& lagrange,
                               const TrainConfig& cfg);

/// Full step: search misreports, then value + gradients.
LossResult loss(const AuctionModel& model, const Batch& batch, const LagrangeState& lagrange,
                const TrainConfig& cfg, std::uint64_t seed);

/// lambda += rho * penalty for each constraint; rho then grows by its
/// configured factor.
void lagrange_update(LagrangeState& state, double ir_penalty_mean, double ic_penalty_mean);

/// Minibatch training against sampled valuation profiles; deterministic
/// given the config seeds. Divergence aborts with a diagnostic dump.
TrainResult train(const market::MarketConfig& market_cfg, const TrainConfig& cfg);

nlohmann::json model_to_json(const AuctionModel& model, std::uint64_t data_seed);
AuctionModel model_from_json(const nlohmann::json& j, std::uint64_t* data_seed = nullptr);

/// CSV with header `iter,revenue,ir_penalty,ic_penalty,loss`.
std::string metrics_to_csv(const std::vector<BatchMetrics>& metrics);

TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json train_config_to_json(const TrainConfig& cfg);

std::string payment_mode_name(PaymentMode mode);
PaymentMode payment_mode_from_name(const std::string& name);

}  // namespace auctionlab::auction
