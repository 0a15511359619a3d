#include "auctionlab/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include <nlohmann/json.hpp>

#include "auctionlab/errors.hpp"
#include "auctionlab/rng.hpp"

namespace auctionlab::nn {

namespace {

constexpr int kNetFormatVersion = 1;

double apply_hidden(HiddenActivation a, double x) {
    switch (a) {
        case HiddenActivation::tanh: return std::tanh(x);
        case HiddenActivation::relu: return x > 0.0 ? x : 0.0;
    }
    throw domain_error("unknown hidden activation");
}

// Derivative expressed through the activation value where that is cheaper.
double hidden_derivative(HiddenActivation a, double activated) {
    switch (a) {
        case HiddenActivation::tanh: return 1.0 - activated * activated;
        case HiddenActivation::relu: return activated > 0.0 ? 1.0 : 0.0;
    }
    throw domain_error("unknown hidden activation");
}

double apply_output(OutputActivation a, double x) {
    switch (a) {
        case OutputActivation::linear: return x;
        case OutputActivation::sigmoid: return sigmoid(x);
        case OutputActivation::softplus: return softplus(x);
        case OutputActivation::tanh: return std::tanh(x);
    }
    throw domain_error("unknown output activation");
}

double output_derivative(OutputActivation a, double pre, double activated) {
    switch (a) {
        case OutputActivation::linear: return 1.0;
        case OutputActivation::sigmoid: return activated * (1.0 - activated);
        case OutputActivation::softplus: return sigmoid(pre);
        case OutputActivation::tanh: return 1.0 - activated * activated;
    }
    throw domain_error("unknown output activation");
}

struct ForwardTrace {
    // activations[0] is the input; activations[k+1] is the output of layer k.
    std::vector<std::vector<double>> activations;
    // pre_activations[k] is W_k a_k + b_k before the nonlinearity.
    std::vector<std::vector<double>> pre_activations;
};

ForwardTrace forward_trace(const DenseNet& net, const std::vector<double>& input) {
    if (input.size() != net.input_size())
        throw dimension_error("net_forward: input has " + std::to_string(input.size()) +
                              " entries, network expects " + std::to_string(net.input_size()));
    for (double x : input)
        if (!std::isfinite(x)) throw domain_error("net_forward: input contains non-finite value");
    ForwardTrace trace;
    trace.activations.reserve(net.n_layers() + 1);
    trace.pre_activations.reserve(net.n_layers());
    trace.activations.push_back(input);
    for (std::size_t k = 0; k < net.n_layers(); ++k) {
        const Matrix& w = net.weights[k];
        const std::vector<double>& b = net.biases[k];
        const std::vector<double>& a = trace.activations.back();
        std::vector<double> pre(w.rows);
        for (std::size_t r = 0; r < w.rows; ++r) {
            double acc = b[r];
            const double* row = &w.data[r * w.cols];
            for (std::size_t c = 0; c < w.cols; ++c) acc += row[c] * a[c];
            pre[r] = acc;
        }
        std::vector<double> out(pre.size());
        const bool last = (k + 1 == net.n_layers());
        for (std::size_t r = 0; r < pre.size(); ++r)
            out[r] = last ? apply_output(net.output_activation, pre[r])
                          : apply_hidden(net.hidden_activation, pre[r]);
        trace.pre_activations.push_back(std::move(pre));
        trace.activations.push_back(std::move(out));
    }
    return trace;
}

// Shared delta recursion. When want_params is false only the input gradient
// is produced, which roughly halves the work in misreport ascent loops.
Gradients backprop_impl(const DenseNet& net, const std::vector<double>& input,
                        const std::vector<double>& upstream, bool want_params) {
    if (upstream.size() != net.output_size())
        throw dimension_error("net_backprop: upstream has " + std::to_string(upstream.size()) +
                              " entries, network outputs " + std::to_string(net.output_size()));
    const ForwardTrace trace = forward_trace(net, input);
    const std::size_t n = net.n_layers();

    Gradients grads;
    if (want_params) {
        grads.weights.reserve(n);
        grads.biases.reserve(n);
        for (std::size_t k = 0; k < n; ++k) {
            grads.weights.emplace_back(net.weights[k].rows, net.weights[k].cols);
            grads.biases.emplace_back(net.biases[k].size(), 0.0);
        }
    }

    // delta = dL/d(pre-activation of current layer), walking backwards.
    std::vector<double> delta(net.output_size());
    for (std::size_t r = 0; r < delta.size(); ++r)
        delta[r] = upstream[r] * output_derivative(net.output_activation,
                                                   trace.pre_activations[n - 1][r],
                                                   trace.activations[n][r]);

    for (std::size_t kp1 = n; kp1-- > 0;) {
        const Matrix& w = net.weights[kp1];
        const std::vector<double>& a_in = trace.activations[kp1];
        if (want_params) {
            Matrix& dw = grads.weights[kp1];
            std::vector<double>& db = grads.biases[kp1];
            for (std::size_t r = 0; r < w.rows; ++r) {
                db[r] = delta[r];
                double* drow = &dw.data[r * w.cols];
                for (std::size_t c = 0; c < w.cols; ++c) drow[c] = delta[r] * a_in[c];
            }
        }
        // Propagate to the previous layer's activations: W^T delta.
        std::vector<double> prev(w.cols, 0.0);
        for (std::size_t r = 0; r < w.rows; ++r) {
            const double* row = &w.data[r * w.cols];
            for (std::size_t c = 0; c < w.cols; ++c) prev[c] += row[c] * delta[r];
        }
        if (kp1 == 0) {
            grads.input_gradient = std::move(prev);
            break;
        }
        // Through the hidden nonlinearity of layer kp1-1.
        for (std::size_t c = 0; c < prev.size(); ++c)
            prev[c] *= hidden_derivative(net.hidden_activation, trace.activations[kp1][c]);
        delta = std::move(prev);
    }
    return grads;
}

}  // namespace

double sigmoid(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

DenseNet net_init(const std::vector<std::size_t>& layer_sizes, HiddenActivation hidden,
                  OutputActivation output, std::uint64_t seed) {
    if (layer_sizes.size() < 2)
        throw config_error("net_init: need at least an input and an output layer");
    for (std::size_t s : layer_sizes)
        if (s == 0) throw config_error("net_init: zero-width layer");

    DenseNet net;
    net.layer_sizes = layer_sizes;
    net.hidden_activation = hidden;
    net.output_activation = output;
    for (std::size_t k = 0; k + 1 < layer_sizes.size(); ++k) {
        const std::size_t fan_in = layer_sizes[k];
        const std::size_t fan_out = layer_sizes[k + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Rng layer_rng{derive_seed(seed, {static_cast<std::uint64_t>(k)})};
        Matrix w(fan_out, fan_in);
        for (double& v : w.data) v = layer_rng.uniform(-bound, bound);
        net.weights.push_back(std::move(w));
        net.biases.emplace_back(fan_out, 0.0);
    }
    return net;
}

std::vector<double> net_forward(const DenseNet& net, const std::vector<double>& input) {
    return forward_trace(net, input).activations.back();
}

Gradients net_backprop(const DenseNet& net, const std::vector<double>& input,
                       const std::vector<double>& upstream) {
    return backprop_impl(net, input, upstream, /*want_params=*/true);
}

std::vector<double> net_input_gradient(const DenseNet& net, const std::vector<double>& input,
                                       const std::vector<double>& upstream) {
    return backprop_impl(net, input, upstream, /*want_params=*/false).input_gradient;
}

AdamState adam_init(const DenseNet& net, double learning_rate) {
    AdamState state;
    state.learning_rate = learning_rate;
    for (std::size_t k = 0; k < net.n_layers(); ++k) {
        state.first_moment_w.emplace_back(net.weights[k].rows, net.weights[k].cols);
        state.second_moment_w.emplace_back(net.weights[k].rows, net.weights[k].cols);
        state.first_moment_b.emplace_back(net.biases[k].size(), 0.0);
        state.second_moment_b.emplace_back(net.biases[k].size(), 0.0);
    }
    return state;
}

namespace {

void adam_update_buffer(std::vector<double>& param, std::vector<double>& m, std::vector<double>& v,
                        const std::vector<double>& g, const AdamState& s, double corr1,
                        double corr2) {
    for (std::size_t i = 0; i < param.size(); ++i) {
        m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
        v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
        const double m_hat = m[i] / corr1;
        const double v_hat = v[i] / corr2;
        param[i] -= s.learning_rate * m_hat / (std::sqrt(v_hat) + s.epsilon);
    }
}

}  // namespace

void adam_step(AdamState& state, DenseNet& net, const Gradients& grads) {
    if (grads.weights.size() != net.n_layers())
        throw dimension_error("adam_step: gradient layer count mismatch");
    state.step_count += 1;
    const double corr1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double corr2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    for (std::size_t k = 0; k < net.n_layers(); ++k) {
        if (!net.weights[k].same_shape(grads.weights[k]))
            throw dimension_error("adam_step: weight gradient shape mismatch");
        adam_update_buffer(net.weights[k].data, state.first_moment_w[k].data,
                           state.second_moment_w[k].data, grads.weights[k].data, state, corr1,
                           corr2);
        adam_update_buffer(net.biases[k], state.first_moment_b[k], state.second_moment_b[k],
                           grads.biases[k], state, corr1, corr2);
    }
}

void sgd_step(DenseNet& net, const Gradients& grads, double learning_rate) {
    if (grads.weights.size() != net.n_layers())
        throw dimension_error("sgd_step: gradient layer count mismatch");
    for (std::size_t k = 0; k < net.n_layers(); ++k) {
        for (std::size_t i = 0; i < net.weights[k].data.size(); ++i)
            net.weights[k].data[i] -= learning_rate * grads.weights[k].data[i];
        for (std::size_t i = 0; i < net.biases[k].size(); ++i)
            net.biases[k][i] -= learning_rate * grads.biases[k][i];
    }
}

std::vector<double> finite_diff_gradient(
    const std::function<double(const std::vector<double>&)>& f, const std::vector<double>& x,
    double h) {
    if (h <= 0.0) throw config_error("finite_diff_gradient: step size must be positive");
    std::vector<double> grad(x.size());
    std::vector<double> probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + h;
        const double up = f(probe);
        probe[i] = x[i] - h;
        const double down = f(probe);
        probe[i] = x[i];
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

std::string activation_name(HiddenActivation a) {
    switch (a) {
        case HiddenActivation::tanh: return "tanh";
        case HiddenActivation::relu: return "relu";
    }
    throw domain_error("unknown hidden activation");
}

std::string activation_name(OutputActivation a) {
    switch (a) {
        case OutputActivation::linear: return "linear";
        case OutputActivation::sigmoid: return "sigmoid";
        case OutputActivation::softplus: return "softplus";
        case OutputActivation::tanh: return "tanh";
    }
    throw domain_error("unknown output activation");
}

HiddenActivation hidden_activation_from_name(const std::string& name) {
    if (name == "tanh") return HiddenActivation::tanh;
    if (name == "relu") return HiddenActivation::relu;
    throw config_error("unknown hidden activation: " + name);
}

OutputActivation output_activation_from_name(const std::string& name) {
    if (name == "linear") return OutputActivation::linear;
    if (name == "sigmoid") return OutputActivation::sigmoid;
    if (name == "softplus") return OutputActivation::softplus;
    if (name == "tanh") return OutputActivation::tanh;
    throw config_error("unknown output activation: " + name);
}

nlohmann::json net_to_json(const DenseNet& net) {
    nlohmann::json j;
    j["format_version"] = kNetFormatVersion;
    j["layer_sizes"] = net.layer_sizes;
    j["activations"] = {{"hidden", activation_name(net.hidden_activation)},
                        {"output", activation_name(net.output_activation)}};
    nlohmann::json weights = nlohmann::json::array();
    for (const Matrix& w : net.weights) {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t r = 0; r < w.rows; ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t c = 0; c < w.cols; ++c) row.push_back(w(r, c));
            rows.push_back(std::move(row));
        }
        weights.push_back(std::move(rows));
    }
    j["weights"] = std::move(weights);
    j["biases"] = net.biases;
    return j;
}

DenseNet net_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw config_error("network JSON: expected an object");
    const int version = j.value("format_version", 0);
    if (version != kNetFormatVersion)
        throw config_error("network JSON: unsupported format_version " + std::to_string(version));
    DenseNet net;
    net.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
    if (net.layer_sizes.size() < 2) throw config_error("network JSON: fewer than two layers");
    net.hidden_activation =
        hidden_activation_from_name(j.at("activations").at("hidden").get<std::string>());
    net.output_activation =
        output_activation_from_name(j.at("activations").at("output").get<std::string>());
    const nlohmann::json& weights = j.at("weights");
    const nlohmann::json& biases = j.at("biases");
    if (weights.size() != net.layer_sizes.size() - 1 || biases.size() != weights.size())
        throw config_error("network JSON: layer count mismatch");
    for (std::size_t k = 0; k + 1 < net.layer_sizes.size(); ++k) {
        const std::size_t rows = net.layer_sizes[k + 1];
        const std::size_t cols = net.layer_sizes[k];
        const nlohmann::json& wj = weights.at(k);
        if (wj.size() != rows) throw config_error("network JSON: weight row count mismatch");
        Matrix w(rows, cols);
        for (std::size_t r = 0; r < rows; ++r) {
            const nlohmann::json& row = wj.at(r);
            if (row.size() != cols) throw config_error("network JSON: weight column count mismatch");
            for (std::size_t c = 0; c < cols; ++c) w(r, c) = row.at(c).get<double>();
        }
        net.weights.push_back(std::move(w));
        std::vector<double> b = biases.at(k).get<std::vector<double>>();
        if (b.size() != rows) throw config_error("network JSON: bias length mismatch");
        net.biases.push_back(std::move(b));
    }
    return net;
}

}  // namespace auctionlab::nn
