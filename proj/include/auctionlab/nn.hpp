#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "auctionlab/matrix.hpp"

namespace auctionlab::nn {

enum class HiddenActivation { tanh, relu };
enum class OutputActivation { linear, sigmoid, softplus, tanh };

/// Dense feed-forward network. weights[k] has shape
/// (layer_sizes[k+1] x layer_sizes[k]); biases[k] has length layer_sizes[k+1].
/// The hidden activation is applied after every layer except the last, which
/// uses the output activation.
struct DenseNet {
    std::vector<std::size_t> layer_sizes;
    HiddenActivation hidden_activation = HiddenActivation::tanh;
    OutputActivation output_activation = OutputActivation::linear;
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;

    std::size_t input_size() const { return layer_sizes.front(); }
    std::size_t output_size() const { return layer_sizes.back(); }
    std::size_t n_layers() const { return weights.size(); }
};

/// Gradients of a scalar (upstream . output) with respect to every parameter
/// and to the input vector. Shape-congruent with the source network.
struct Gradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
    std::vector<double> input_gradient;
};

/// Adam moment buffers, shape-congruent with the network parameters.
struct AdamState {
    std::vector<Matrix> first_moment_w;
    std::vector<std::vector<double>> first_moment_b;
    std::vector<Matrix> second_moment_w;
    std::vector<std::vector<double>> second_moment_b;
    std::uint64_t step_count = 0;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Scaled-uniform init: weights ~ U(-b, b) with b = sqrt(6 / (fan_in + fan_out)),
/// biases zero. Identical seed gives a bit-identical network.
DenseNet net_init(const std::vector<std::size_t>& layer_sizes, HiddenActivation hidden,
                  OutputActivation output, std::uint64_t seed);

std::vector<double> net_forward(const DenseNet& net, const std::vector<double>& input);

/// Exact reverse-mode gradients of (upstream . output) w.r.t. all parameters
/// and the input vector.
Gradients net_backprop(const DenseNet& net, const std::vector<double>& input,
                       const std::vector<double>& upstream);

/// Input gradient only; skips the parameter buffers. Used in inner loops
/// where only d(output)/d(input) is needed.
std::vector<double> net_input_gradient(const DenseNet& net, const std::vector<double>& input,
                                       const std::vector<double>& upstream);

AdamState adam_init(const DenseNet& net, double learning_rate);

/// Standard Adam update with bias correction; increments step_count by one.
void adam_step(AdamState& state, DenseNet& net, const Gradients& grads);

/// Plain SGD update (config option next to Adam).
void sgd_step(DenseNet& net, const Gradients& grads, double learning_rate);

/// Central finite differences (f(x+h e_i) - f(x-h e_i)) / 2h per coordinate.
std::vector<double> finite_diff_gradient(const std::function<double(const std::vector<double>&)>& f,
                                         const std::vector<double>& x, double h);

/// Versioned JSON round-trip, exact for 64-bit floats.
nlohmann::json net_to_json(const DenseNet& net);
DenseNet net_from_json(const nlohmann::json& j);

std::string activation_name(HiddenActivation a);
std::string activation_name(OutputActivation a);
HiddenActivation hidden_activation_from_name(const std::string& name);
OutputActivation output_activation_from_name(const std::string& name);

// Stable scalar helpers shared with the auction heads.
double sigmoid(double x);
double softplus(double x);

}  // namespace auctionlab::nn
