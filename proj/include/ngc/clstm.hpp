#pragma once

// Componentwise LSTM. The stacked input matrix W (4m x p, row blocks ordered
// forget, input, output, cell) is the unique carrier of each input series'
// influence: column j of W zero means series j cannot move the predictions.
// Gradients come from full backpropagation through time per replicate;
// truncation is realized by segmenting a series into independent replicates.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ngc/nn_core.hpp"
#include "ngc/panel.hpp"

namespace ngc {

struct ClstmNet {
    std::size_t p = 0;       // input series count
    std::size_t hidden = 0;  // m
    Matrix input_weights;     // 4m x p, blocks f, in, o, c
    Matrix recurrent_weights; // 4m x m, same block order
    Vector gate_biases;       // 4m
    Vector output_weights;    // m

    std::size_t parameter_count() const {
        return 4 * hidden * p + 4 * hidden * hidden + 4 * hidden + hidden;
    }
};

struct LstmState {
    Vector h;
    Vector c;
};

inline void check_shapes(const ClstmNet& net) {
    if (net.p == 0 || net.hidden == 0)
        throw std::invalid_argument("clstm: p and hidden must be positive");
    const std::size_t m = net.hidden;
    if (net.input_weights.rows != 4 * m || net.input_weights.cols != net.p)
        throw std::invalid_argument("clstm: input matrix must be 4m x p");
    if (net.recurrent_weights.rows != 4 * m || net.recurrent_weights.cols != m)
        throw std::invalid_argument("clstm: recurrent matrix must be 4m x m");
    if (net.gate_biases.size() != 4 * m)
        throw std::invalid_argument("clstm: gate bias length mismatch");
    if (net.output_weights.size() != m)
        throw std::invalid_argument("clstm: output weight length mismatch");
}

inline ClstmNet init_clstm(std::size_t p, std::size_t m, std::uint64_t seed,
                           InitScheme input_scheme = InitScheme::GlorotUniform,
                           InitScheme dense_scheme = InitScheme::GlorotUniform,
                           double forget_bias = 0.0) {
    ClstmNet net;
    net.p = p;
    net.hidden = m;
    net.input_weights = init_params(4 * m, p, input_scheme, mix_seed(seed, 0));
    net.recurrent_weights = init_params(4 * m, m, dense_scheme, mix_seed(seed, 1));
    net.gate_biases = init_bias(4 * m);
    for (std::size_t h = 0; h < m; ++h) net.gate_biases[h] = forget_bias;
    Matrix out = init_params(1, m, dense_scheme, mix_seed(seed, 2));
    net.output_weights = out.data;
    check_shapes(net);
    return net;
}

namespace detail {

// One cell update. gates (length 4m) receives the post-nonlinearity gate
// values in block order f, i, o, g; state is updated in place.
inline void lstm_step_kernel(const ClstmNet& net, const double* x, Vector& h, Vector& c,
                             Vector& gates) {
    const std::size_t m = net.hidden;
    for (std::size_t r = 0; r < 4 * m; ++r)
        gates[r] = net.gate_biases[r] + dot(net.input_weights.row(r), x, net.p) +
                   dot(net.recurrent_weights.row(r), h.data(), m);
    for (std::size_t r = 0; r < 3 * m; ++r) gates[r] = sigmoid(gates[r]);
    for (std::size_t r = 3 * m; r < 4 * m; ++r) gates[r] = std::tanh(gates[r]);
    const double* f = gates.data();
    const double* in = gates.data() + m;
    const double* o = gates.data() + 2 * m;
    const double* g = gates.data() + 3 * m;
    for (std::size_t u = 0; u < m; ++u) {
        c[u] = f[u] * c[u] + in[u] * g[u];
        h[u] = o[u] * std::tanh(c[u]);
    }
}

inline void check_panel_for_clstm(const ClstmNet& net, const TimeSeriesPanel& panel) {
    if (panel.series_count() != net.p)
        throw std::invalid_argument("clstm: panel has " + std::to_string(panel.series_count()) +
                                    " series, net expects " + std::to_string(net.p));
    for (std::size_t r = 0; r < panel.replicates.size(); ++r)
        if (panel.replicates[r].rows < 2)
            throw std::invalid_argument("clstm: replicate " + std::to_string(r) +
                                        " shorter than 2 rows");
}

}  // namespace detail

/// Standard LSTM update: sigmoid gates, tanh cell candidate and output squash.
inline LstmState lstm_step(const ClstmNet& net, const Vector& x, const LstmState& state) {
    check_shapes(net);
    if (x.size() != net.p || state.h.size() != net.hidden || state.c.size() != net.hidden)
        throw std::invalid_argument("lstm_step: shape mismatch");
    LstmState next{state.h, state.c};
    Vector gates(4 * net.hidden);
    detail::lstm_step_kernel(net, x.data(), next.h, next.c, gates);
    return next;
}

/// One-step-ahead predictions for rows 2..T of one replicate (T-1 values).
/// State starts at zero; the prediction for row t uses rows 1..t-1.
inline Vector clstm_forward(const ClstmNet& net, const Matrix& replicate) {
    check_shapes(net);
    if (replicate.cols != net.p)
        throw std::invalid_argument("clstm_forward: series count mismatch");
    if (replicate.rows < 2)
        throw std::invalid_argument("clstm_forward: series shorter than 2 rows");
    const std::size_t m = net.hidden, T = replicate.rows;
    Vector h(m, 0.0), c(m, 0.0), gates(4 * m);
    Vector preds(T - 1);
    for (std::size_t s = 0; s + 1 < T; ++s) {
        detail::lstm_step_kernel(net, replicate.row(s), h, c, gates);
        preds[s] = dot(net.output_weights.data(), h.data(), m);
    }
    return preds;
}

/// Squared-error loss of the target series over all replicates; each
/// replicate of length T contributes T-1 terms.
inline double clstm_loss(const ClstmNet& net, const TimeSeriesPanel& panel, std::size_t target) {
    check_shapes(net);
    detail::check_panel_for_clstm(net, panel);
    if (target >= net.p) throw std::invalid_argument("clstm_loss: target index out of range");
    const std::size_t m = net.hidden;
    Vector h(m), c(m), gates(4 * m);
    double loss = 0.0;
    for (const Matrix& rep : panel.replicates) {
        std::fill(h.begin(), h.end(), 0.0);
        std::fill(c.begin(), c.end(), 0.0);
        for (std::size_t s = 0; s + 1 < rep.rows; ++s) {
            detail::lstm_step_kernel(net, rep.row(s), h, c, gates);
            const double err = rep(s + 1, target) - dot(net.output_weights.data(), h.data(), m);
            loss += err * err;
        }
    }
    if (!std::isfinite(loss)) throw std::runtime_error("clstm_loss: non-finite loss");
    return loss;
}

/// Exact gradient of clstm_loss via full BPTT per replicate, summed over
/// replicates.
inline ClstmNet clstm_grad(const ClstmNet& net, const TimeSeriesPanel& panel, std::size_t target) {
    check_shapes(net);
    detail::check_panel_for_clstm(net, panel);
    if (target >= net.p) throw std::invalid_argument("clstm_grad: target index out of range");
    const std::size_t m = net.hidden, p = net.p;

    ClstmNet grad;
    grad.p = p;
    grad.hidden = m;
    grad.input_weights = Matrix(4 * m, p);
    grad.recurrent_weights = Matrix(4 * m, m);
    grad.gate_biases.assign(4 * m, 0.0);
    grad.output_weights.assign(m, 0.0);

    // Stashes sized to the longest replicate.
    std::size_t max_steps = 0;
    for (const auto& rep : panel.replicates)
        max_steps = std::max(max_steps, rep.rows - 1);
    Matrix gate_hist(max_steps, 4 * m);
    Matrix c_hist(max_steps, m);
    Matrix h_hist(max_steps, m);
    Vector h(m), c(m), gates(4 * m);
    Vector dh(m), dc(m), dz(4 * m), dh_prev(m);

    for (const Matrix& rep : panel.replicates) {
        const std::size_t steps = rep.rows - 1;
        std::fill(h.begin(), h.end(), 0.0);
        std::fill(c.begin(), c.end(), 0.0);
        for (std::size_t s = 0; s < steps; ++s) {
            detail::lstm_step_kernel(net, rep.row(s), h, c, gates);
            std::copy(gates.begin(), gates.end(), gate_hist.row(s));
            std::copy(c.begin(), c.end(), c_hist.row(s));
            std::copy(h.begin(), h.end(), h_hist.row(s));
        }
        std::fill(dh.begin(), dh.end(), 0.0);
        std::fill(dc.begin(), dc.end(), 0.0);
        for (std::size_t s = steps; s-- > 0;) {
            const double* hs = h_hist.row(s);
            const double pred = dot(net.output_weights.data(), hs, m);
            const double dpred = 2.0 * (pred - rep(s + 1, target));
            for (std::size_t u = 0; u < m; ++u) {
                grad.output_weights[u] += dpred * hs[u];
                dh[u] += dpred * net.output_weights[u];
            }
            const double* f = gate_hist.row(s);
            const double* in = f + m;
            const double* o = f + 2 * m;
            const double* g = f + 3 * m;
            const double* cs = c_hist.row(s);
            const double* c_prev = s > 0 ? c_hist.row(s - 1) : nullptr;
            const double* h_prev = s > 0 ? h_hist.row(s - 1) : nullptr;
            for (std::size_t u = 0; u < m; ++u) {
                const double tc = std::tanh(cs[u]);
                const double dcu = dc[u] + dh[u] * o[u] * (1.0 - tc * tc);
                const double cp = c_prev ? c_prev[u] : 0.0;
                dz[u] = dcu * cp * f[u] * (1.0 - f[u]);                  // forget
                dz[m + u] = dcu * g[u] * in[u] * (1.0 - in[u]);          // input
                dz[2 * m + u] = dh[u] * tc * o[u] * (1.0 - o[u]);        // output
                dz[3 * m + u] = dcu * in[u] * (1.0 - g[u] * g[u]);       // cell
                dc[u] = dcu * f[u];
            }
            const double* x = rep.row(s);
            for (std::size_t r = 0; r < 4 * m; ++r) {
                const double d = dz[r];
                grad.gate_biases[r] += d;
                double* grow = grad.input_weights.row(r);
                for (std::size_t j = 0; j < p; ++j) grow[j] += d * x[j];
                if (h_prev) {
                    double* urow = grad.recurrent_weights.row(r);
                    for (std::size_t u = 0; u < m; ++u) urow[u] += d * h_prev[u];
                }
            }
            std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
            for (std::size_t r = 0; r < 4 * m; ++r) {
                const double d = dz[r];
                const double* urow = net.recurrent_weights.row(r);
                for (std::size_t u = 0; u < m; ++u) dh_prev[u] += d * urow[u];
            }
            dh.swap(dh_prev);
        }
    }
    if (!all_finite(grad.input_weights) || !all_finite(grad.recurrent_weights))
        throw std::runtime_error("clstm_grad: non-finite gradient");
    return grad;
}

/// Consecutive non-overlapping segments of exactly segment_length rows; a
/// trailing remainder is kept when it still has at least 2 rows.
inline std::vector<Matrix> segment_series(const Matrix& series, std::size_t segment_length) {
    if (segment_length < 2)
        throw std::invalid_argument("segment_series: segment length must be at least 2");
    std::vector<Matrix> out;
    std::size_t start = 0;
    while (start + segment_length <= series.rows) {
        Matrix seg(segment_length, series.cols);
        std::copy(series.row(start), series.row(start) + segment_length * series.cols,
                  seg.data.data());
        out.push_back(std::move(seg));
        start += segment_length;
    }
    const std::size_t rem = series.rows - start;
    if (rem >= 2) {
        Matrix seg(rem, series.cols);
        std::copy(series.row(start), series.row(start) + rem * series.cols, seg.data.data());
        out.push_back(std::move(seg));
    }
    return out;
}

inline TimeSeriesPanel segment_panel(const TimeSeriesPanel& panel, std::size_t segment_length) {
    TimeSeriesPanel out;
    out.names = panel.names;
    for (const auto& rep : panel.replicates)
        for (auto& seg : segment_series(rep, segment_length)) out.replicates.push_back(std::move(seg));
    return out;
}

// Flat layout: [input columns (series-major) | recurrent | biases | output].

inline std::size_t clstm_input_view_size(const ClstmNet& net) { return net.p * 4 * net.hidden; }

inline Vector clstm_flatten(const ClstmNet& net) {
    Vector flat;
    flat.reserve(net.parameter_count());
    for (std::size_t j = 0; j < net.p; ++j)
        for (std::size_t r = 0; r < 4 * net.hidden; ++r) flat.push_back(net.input_weights(r, j));
    flat.insert(flat.end(), net.recurrent_weights.data.begin(), net.recurrent_weights.data.end());
    flat.insert(flat.end(), net.gate_biases.begin(), net.gate_biases.end());
    flat.insert(flat.end(), net.output_weights.begin(), net.output_weights.end());
    return flat;
}

inline void clstm_unflatten(ClstmNet& net, const Vector& flat) {
    if (flat.size() != net.parameter_count())
        throw std::invalid_argument("clstm_unflatten: size mismatch");
    std::size_t idx = 0;
    for (std::size_t j = 0; j < net.p; ++j)
        for (std::size_t r = 0; r < 4 * net.hidden; ++r) net.input_weights(r, j) = flat[idx++];
    for (auto& v : net.recurrent_weights.data) v = flat[idx++];
    for (auto& v : net.gate_biases) v = flat[idx++];
    for (auto& v : net.output_weights) v = flat[idx++];
}

}  // namespace ngc
