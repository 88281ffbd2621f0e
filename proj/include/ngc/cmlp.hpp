#pragma once

// Componentwise MLP: one network per output series. The first layer consumes
// K lagged input vectors through per-lag weight matrices; series j Granger
// non-causes the output when column j of every first-layer matrix is zero.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ngc/nn_core.hpp"
#include "ngc/panel.hpp"

namespace ngc {

struct CmlpNet {
    std::size_t p = 0;       // input series count
    std::size_t lag = 0;     // K
    std::size_t hidden = 0;  // units per hidden layer
    std::size_t layers = 1;  // hidden layer count L
    Activation activation = Activation::Tanh;

    std::vector<Matrix> first_layer;    // K matrices, hidden x p
    std::vector<Matrix> hidden_layers;  // L-1 matrices, hidden x hidden
    std::vector<Vector> biases;         // L vectors, length hidden
    Vector output_weights;              // length hidden

    std::size_t parameter_count() const {
        return lag * hidden * p + (layers - 1) * hidden * hidden + layers * hidden + hidden;
    }
};

inline void check_shapes(const CmlpNet& net) {
    if (net.p == 0 || net.lag == 0 || net.hidden == 0 || net.layers == 0)
        throw std::invalid_argument("cmlp: p, lag, hidden and layers must be positive");
    if (net.first_layer.size() != net.lag)
        throw std::invalid_argument("cmlp: expected one first-layer matrix per lag");
    for (const auto& w : net.first_layer)
        if (w.rows != net.hidden || w.cols != net.p)
            throw std::invalid_argument("cmlp: first-layer matrix shape mismatch");
    if (net.hidden_layers.size() != net.layers - 1)
        throw std::invalid_argument("cmlp: expected L-1 hidden matrices");
    for (const auto& w : net.hidden_layers)
        if (w.rows != net.hidden || w.cols != net.hidden)
            throw std::invalid_argument("cmlp: hidden matrix shape mismatch");
    if (net.biases.size() != net.layers)
        throw std::invalid_argument("cmlp: expected one bias vector per layer");
    for (const auto& b : net.biases)
        if (b.size() != net.hidden)
            throw std::invalid_argument("cmlp: bias length mismatch");
    if (net.output_weights.size() != net.hidden)
        throw std::invalid_argument("cmlp: output weight length mismatch");
}

/// Fresh network. Hidden and output weights follow the given scheme; the
/// first-layer (input) matrices get their own scheme so penalized fits can
/// start from the all-sparse point.
inline CmlpNet init_cmlp(std::size_t p, std::size_t lag, std::size_t hidden,
                         std::size_t layers, Activation act, std::uint64_t seed,
                         InitScheme input_scheme = InitScheme::GlorotUniform,
                         InitScheme dense_scheme = InitScheme::GlorotUniform) {
    CmlpNet net;
    net.p = p;
    net.lag = lag;
    net.hidden = hidden;
    net.layers = layers;
    net.activation = act;
    std::uint64_t stream = 0;
    for (std::size_t k = 0; k < lag; ++k)
        net.first_layer.push_back(init_params(hidden, p, input_scheme, mix_seed(seed, stream++)));
    for (std::size_t l = 1; l < layers; ++l)
        net.hidden_layers.push_back(init_params(hidden, hidden, dense_scheme, mix_seed(seed, stream++)));
    for (std::size_t l = 0; l < layers; ++l) net.biases.push_back(init_bias(hidden));
    Matrix out = init_params(1, hidden, dense_scheme, mix_seed(seed, stream++));
    net.output_weights = out.data;
    check_shapes(net);
    return net;
}

namespace detail {

// Forward through all layers for one lag window. lags[k] points at x_{t-1-k}.
// Fills acts[l] (post-activation of layer l) and returns the prediction.
inline double cmlp_forward_window(const CmlpNet& net, const double* const* lags,
                                  std::vector<Vector>& acts) {
    const std::size_t H = net.hidden;
    Vector& h1 = acts[0];
    for (std::size_t h = 0; h < H; ++h) h1[h] = net.biases[0][h];
    for (std::size_t k = 0; k < net.lag; ++k) {
        const Matrix& w = net.first_layer[k];
        const double* x = lags[k];
        for (std::size_t h = 0; h < H; ++h) h1[h] += dot(w.row(h), x, net.p);
    }
    for (std::size_t h = 0; h < H; ++h) h1[h] = activate(net.activation, h1[h]);
    for (std::size_t l = 1; l < net.layers; ++l) {
        const Matrix& w = net.hidden_layers[l - 1];
        Vector& out = acts[l];
        const Vector& in = acts[l - 1];
        for (std::size_t h = 0; h < H; ++h)
            out[h] = activate(net.activation, net.biases[l][h] + dot(w.row(h), in.data(), H));
    }
    return dot(net.output_weights.data(), acts[net.layers - 1].data(), H);
}

inline void check_panel_for_cmlp(const CmlpNet& net, const TimeSeriesPanel& panel) {
    if (panel.series_count() != net.p)
        throw std::invalid_argument("cmlp: panel has " + std::to_string(panel.series_count()) +
                                    " series, net expects " + std::to_string(net.p));
    for (std::size_t r = 0; r < panel.replicates.size(); ++r)
        if (panel.replicates[r].rows < net.lag + 1)
            throw std::invalid_argument("cmlp: replicate " + std::to_string(r) + " has length " +
                                        std::to_string(panel.replicates[r].rows) +
                                        ", needs more than lag K=" + std::to_string(net.lag));
}

}  // namespace detail

/// One-step prediction from a window of K lags; window[k-1] holds x_{t-k}.
inline double cmlp_forward(const CmlpNet& net, const std::vector<Vector>& window) {
    check_shapes(net);
    if (window.size() != net.lag)
        throw std::invalid_argument("cmlp_forward: expected K=" + std::to_string(net.lag) + " lags");
    std::vector<const double*> lags(net.lag);
    for (std::size_t k = 0; k < net.lag; ++k) {
        if (window[k].size() != net.p)
            throw std::invalid_argument("cmlp_forward: lag vector length mismatch");
        lags[k] = window[k].data();
    }
    std::vector<Vector> acts(net.layers, Vector(net.hidden));
    return detail::cmlp_forward_window(net, lags.data(), acts);
}

/// Sum of squared one-step-ahead errors for the target series, summed over
/// replicates. Each replicate of length T contributes T-K terms.
inline double cmlp_loss(const CmlpNet& net, const TimeSeriesPanel& panel, std::size_t target) {
    check_shapes(net);
    detail::check_panel_for_cmlp(net, panel);
    if (target >= net.p) throw std::invalid_argument("cmlp_loss: target index out of range");
    const std::size_t K = net.lag;
    std::vector<Vector> acts(net.layers, Vector(net.hidden));
    std::vector<const double*> lags(K);
    double loss = 0.0;
    for (const Matrix& rep : panel.replicates) {
        for (std::size_t t = K; t < rep.rows; ++t) {
            for (std::size_t k = 0; k < K; ++k) lags[k] = rep.row(t - 1 - k);
            const double pred = detail::cmlp_forward_window(net, lags.data(), acts);
            const double err = rep(t, target) - pred;
            loss += err * err;
        }
    }
    if (!std::isfinite(loss)) throw std::runtime_error("cmlp_loss: non-finite loss");
    return loss;
}

/// Exact gradient of cmlp_loss by reverse-mode accumulation; result has the
/// same shapes as the network parameters.
inline CmlpNet cmlp_grad(const CmlpNet& net, const TimeSeriesPanel& panel, std::size_t target) {
    check_shapes(net);
    detail::check_panel_for_cmlp(net, panel);
    if (target >= net.p) throw std::invalid_argument("cmlp_grad: target index out of range");
    const std::size_t K = net.lag, H = net.hidden, L = net.layers, p = net.p;

    CmlpNet grad;
    grad.p = p; grad.lag = K; grad.hidden = H; grad.layers = L;
    grad.activation = net.activation;
    grad.first_layer.assign(K, Matrix(H, p));
    grad.hidden_layers.assign(L - 1, Matrix(H, H));
    grad.biases.assign(L, Vector(H, 0.0));
    grad.output_weights.assign(H, 0.0);

    std::vector<Vector> acts(L, Vector(H));
    std::vector<const double*> lags(K);
    Vector delta(H), delta_prev(H);

    for (const Matrix& rep : panel.replicates) {
        for (std::size_t t = K; t < rep.rows; ++t) {
            for (std::size_t k = 0; k < K; ++k) lags[k] = rep.row(t - 1 - k);
            const double pred = detail::cmlp_forward_window(net, lags.data(), acts);
            const double dpred = 2.0 * (pred - rep(t, target));

            // output layer
            const Vector& top = acts[L - 1];
            for (std::size_t h = 0; h < H; ++h) {
                grad.output_weights[h] += dpred * top[h];
                delta[h] = dpred * net.output_weights[h] *
                           activate_deriv_from_output(net.activation, top[h]);
            }
            // hidden layers L-1 .. 1 (matrices index l-1 connect layer l-1 -> l)
            for (std::size_t l = L; l-- > 1;) {
                const Matrix& w = net.hidden_layers[l - 1];
                Matrix& gw = grad.hidden_layers[l - 1];
                const Vector& below = acts[l - 1];
                Vector& gb = grad.biases[l];
                for (std::size_t h = 0; h < H; ++h) {
                    gb[h] += delta[h];
                    double* grow = gw.row(h);
                    const double d = delta[h];
                    for (std::size_t j = 0; j < H; ++j) grow[j] += d * below[j];
                }
                for (std::size_t j = 0; j < H; ++j) {
                    double s = 0.0;
                    for (std::size_t h = 0; h < H; ++h) s += delta[h] * w(h, j);
                    delta_prev[j] = s * activate_deriv_from_output(net.activation, below[j]);
                }
                delta.swap(delta_prev);
            }
            // first layer
            Vector& gb1 = grad.biases[0];
            for (std::size_t h = 0; h < H; ++h) gb1[h] += delta[h];
            for (std::size_t k = 0; k < K; ++k) {
                Matrix& gw = grad.first_layer[k];
                const double* x = lags[k];
                for (std::size_t h = 0; h < H; ++h) {
                    double* grow = gw.row(h);
                    const double d = delta[h];
                    for (std::size_t j = 0; j < p; ++j) grow[j] += d * x[j];
                }
            }
        }
    }
    for (const auto& m : grad.first_layer)
        if (!all_finite(m)) throw std::runtime_error("cmlp_grad: non-finite gradient");
    return grad;
}

// Flat parameter layout: [first_layer (series-major input view) | hidden | biases | output].
// The input view prefix is ordered [series j][lag k][hidden h] so prox
// operators can act on a contiguous prefix.

inline std::size_t cmlp_input_view_size(const CmlpNet& net) {
    return net.p * net.lag * net.hidden;
}

inline Vector cmlp_flatten(const CmlpNet& net) {
    Vector flat;
    flat.reserve(net.parameter_count());
    for (std::size_t j = 0; j < net.p; ++j)
        for (std::size_t k = 0; k < net.lag; ++k)
            for (std::size_t h = 0; h < net.hidden; ++h)
                flat.push_back(net.first_layer[k](h, j));
    for (const auto& m : net.hidden_layers) flat.insert(flat.end(), m.data.begin(), m.data.end());
    for (const auto& b : net.biases) flat.insert(flat.end(), b.begin(), b.end());
    flat.insert(flat.end(), net.output_weights.begin(), net.output_weights.end());
    return flat;
}

inline void cmlp_unflatten(CmlpNet& net, const Vector& flat) {
    if (flat.size() != net.parameter_count())
        throw std::invalid_argument("cmlp_unflatten: size mismatch");
    std::size_t idx = 0;
    for (std::size_t j = 0; j < net.p; ++j)
        for (std::size_t k = 0; k < net.lag; ++k)
            for (std::size_t h = 0; h < net.hidden; ++h)
                net.first_layer[k](h, j) = flat[idx++];
    for (auto& m : net.hidden_layers)
        for (auto& v : m.data) v = flat[idx++];
    for (auto& b : net.biases)
        for (auto& v : b) v = flat[idx++];
    for (auto& v : net.output_weights) v = flat[idx++];
}

}  // namespace ngc
