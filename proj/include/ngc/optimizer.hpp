#pragma once

// Proximal gradient descent with backtracking line search for one
// componentwise network: smooth squared-error loss plus a structured input
// penalty. Only the input groups pass through the prox; every other
// parameter takes a plain gradient step. The flat parameter layout places
// the input-group view as a contiguous prefix, so the prox acts on a span.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ngc/clstm.hpp"
#include "ngc/cmlp.hpp"
#include "ngc/nn_core.hpp"
#include "ngc/panel.hpp"
#include "ngc/penalties.hpp"

namespace ngc {

struct FitConfig {
    std::size_t max_iters = 5000;
    double initial_step = 1.0;
    double backtrack_factor = 0.5;
    double tolerance = 1e-6;   // relative objective change over stall_window iterations
    std::size_t stall_window = 10;
    std::uint64_t seed = 0;    // used by callers to initialize models; the fit itself is deterministic
};

struct TracePoint {
    std::size_t iteration;
    double smooth;
    double penalty;
};

template <class Model>
struct FitResult {
    Model params;
    std::vector<TracePoint> trace;
    bool converged = false;
    std::size_t iterations = 0;
    // Largest input-group gradient norm seen at any visited iterate; feeds
    // the lambda_max computation.
    double sup_input_group_grad = 0.0;
};

/// Uniform access to the two model families for the optimizer.
template <class Model>
struct ModelOps;

template <>
struct ModelOps<CmlpNet> {
    static double loss(const CmlpNet& net, const TimeSeriesPanel& panel, std::size_t target) {
        return cmlp_loss(net, panel, target);
    }
    static CmlpNet grad(const CmlpNet& net, const TimeSeriesPanel& panel, std::size_t target) {
        return cmlp_grad(net, panel, target);
    }
    static Vector flatten(const CmlpNet& net) { return cmlp_flatten(net); }
    static void unflatten(CmlpNet& net, const Vector& flat) { cmlp_unflatten(net, flat); }
    static std::size_t view_size(const CmlpNet& net) { return cmlp_input_view_size(net); }
    static GroupViewKind view_kind() { return GroupViewKind::MlpLags; }
    static std::size_t view_blocks(const CmlpNet& net) { return net.lag; }
    static std::size_t view_block_len(const CmlpNet& net) { return net.hidden; }
};

template <>
struct ModelOps<ClstmNet> {
    static double loss(const ClstmNet& net, const TimeSeriesPanel& panel, std::size_t target) {
        return clstm_loss(net, panel, target);
    }
    static ClstmNet grad(const ClstmNet& net, const TimeSeriesPanel& panel, std::size_t target) {
        return clstm_grad(net, panel, target);
    }
    static Vector flatten(const ClstmNet& net) { return clstm_flatten(net); }
    static void unflatten(ClstmNet& net, const Vector& flat) { clstm_unflatten(net, flat); }
    static std::size_t view_size(const ClstmNet& net) { return clstm_input_view_size(net); }
    static GroupViewKind view_kind() { return GroupViewKind::LstmColumn; }
    static std::size_t view_blocks(const ClstmNet&) { return 1; }
    static std::size_t view_block_len(const ClstmNet& net) { return 4 * net.hidden; }
};

/// Smooth loss and penalty value at the current parameters.
template <class Model>
std::pair<double, double> objective(const Model& model, const TimeSeriesPanel& panel,
                                    std::size_t target, const PenaltySpec& spec) {
    spec.validate();
    const double smooth = ModelOps<Model>::loss(model, panel, target);
    const double pen = penalty_value(spec, input_group_view(model));
    return {smooth, pen};
}

template <class Model>
FitResult<Model> prox_grad_fit(const Model& model, const TimeSeriesPanel& panel,
                               std::size_t target, const PenaltySpec& spec,
                               const FitConfig& config);

/// Penalty strength above which a fit started from zeroed input groups keeps
/// every group bit-exact zero through every iteration. Computed by running
/// the optimizer once with the groups pinned (a huge lambda wipes them on
/// every step) and taking the largest input-group gradient norm seen along
/// that trajectory: any lambda at or above it reproduces the pinned
/// trajectory exactly, because each survival test ||grad_j|| <= lambda holds
/// at every visited iterate independent of the step size. In particular all
/// groups are zeroed on the first proximal step from the initialization.
template <class Model>
double compute_lambda_max(const Model& model, const TimeSeriesPanel& panel, std::size_t target,
                          const FitConfig& config = FitConfig{}) {
    Model zeroed = model;
    Vector flat = ModelOps<Model>::flatten(zeroed);
    const std::size_t vs = ModelOps<Model>::view_size(zeroed);
    for (std::size_t i = 0; i < vs; ++i) flat[i] = 0.0;
    ModelOps<Model>::unflatten(zeroed, flat);
    const PenaltySpec pinned{PenaltyFamily::Group, 1e12, 0.5};
    return prox_grad_fit(zeroed, panel, target, pinned, config).sup_input_group_grad;
}

/// Minimizes loss + penalty by iterating
///   theta' = prox_{s*lambda}(theta - s * grad(theta))
/// with s chosen by backtracking until
///   f(theta') <= f(theta) + <grad, theta'-theta> + ||theta'-theta||^2 / 2s.
/// The accepted step seeds the next iteration doubled, so the line search
/// recovers from conservative steps. Stops when the relative change of the
/// total objective over stall_window iterations drops below tolerance.
template <class Model>
FitResult<Model> prox_grad_fit(const Model& model, const TimeSeriesPanel& panel,
                               std::size_t target, const PenaltySpec& spec,
                               const FitConfig& config) {
    spec.validate();
    if (!(config.initial_step > 0.0))
        throw std::invalid_argument("prox_grad_fit: initial step must be positive");
    if (config.backtrack_factor <= 0.0 || config.backtrack_factor >= 1.0)
        throw std::invalid_argument("prox_grad_fit: backtrack factor must lie in (0,1)");
    if (config.tolerance < 0.0)
        throw std::invalid_argument("prox_grad_fit: tolerance must be nonnegative");

    using Ops = ModelOps<Model>;
    FitResult<Model> result;
    result.params = model;

    const std::size_t vs = Ops::view_size(result.params);
    const std::size_t p = panel.series_count();
    const std::size_t blocks = Ops::view_blocks(result.params);
    const std::size_t block_len = Ops::view_block_len(result.params);
    const GroupViewKind kind = Ops::view_kind();
    detail::check_family_for_view(spec.family, kind);

    Vector theta = Ops::flatten(result.params);
    Vector trial(theta.size());
    Model work = result.params;

    double f_curr = Ops::loss(result.params, panel, target);
    double pen_curr = spec.lambda * detail::penalty_value_raw(spec.family, spec.mixed_alpha, kind,
                                                              theta.data(), p, blocks, block_len);
    std::vector<double> totals;
    totals.reserve(config.max_iters + 1);
    totals.push_back(f_curr + pen_curr);

    double step = config.initial_step;
    std::size_t iter = 0;
    for (; iter < config.max_iters; ++iter) {
        Vector g;
        try {
            g = Ops::flatten(Ops::grad(result.params, panel, target));
        } catch (const std::runtime_error& e) {
            throw std::runtime_error("prox_grad_fit: iteration " + std::to_string(iter) + ": " +
                                     e.what());
        }
        const std::size_t group = vs / p;
        for (std::size_t j = 0; j < p; ++j)
            result.sup_input_group_grad =
                std::max(result.sup_input_group_grad, l2_norm(g.data() + j * group, group));

        double s = step;
        double f_trial = 0.0;
        bool accepted = false;
        for (int halvings = 0; halvings <= 50; ++halvings) {
            for (std::size_t i = 0; i < theta.size(); ++i) trial[i] = theta[i] - s * g[i];
            detail::apply_prox_raw(spec.family, spec.mixed_alpha, kind, trial.data(), p, blocks,
                                   block_len, s * spec.lambda);
            Ops::unflatten(work, trial);
            try {
                f_trial = Ops::loss(work, panel, target);
            } catch (const std::runtime_error& e) {
                throw std::runtime_error("prox_grad_fit: iteration " + std::to_string(iter) + ": " +
                                         e.what());
            }
            double lin = 0.0, quad = 0.0;
            for (std::size_t i = 0; i < theta.size(); ++i) {
                const double d = trial[i] - theta[i];
                lin += g[i] * d;
                quad += d * d;
            }
            const double bound = f_curr + lin + quad / (2.0 * s) + 1e-12 * (1.0 + std::abs(f_curr));
            if (f_trial <= bound) {
                accepted = true;
                break;
            }
            s *= config.backtrack_factor;
        }
        if (!accepted)
            throw std::runtime_error("prox_grad_fit: line search exhausted 50 halvings at iteration " +
                                     std::to_string(iter));
        if (!std::isfinite(f_trial))
            throw std::runtime_error("prox_grad_fit: non-finite loss at iteration " +
                                     std::to_string(iter));

        theta.swap(trial);
        Ops::unflatten(result.params, theta);
        f_curr = f_trial;
        pen_curr = spec.lambda * detail::penalty_value_raw(spec.family, spec.mixed_alpha, kind,
                                                           theta.data(), p, blocks, block_len);
        result.trace.push_back({iter, f_curr, pen_curr});
        totals.push_back(f_curr + pen_curr);
        step = s * 2.0;

        if (totals.size() > config.stall_window) {
            const double prev = totals[totals.size() - 1 - config.stall_window];
            const double now = totals.back();
            if (std::abs(prev - now) <= config.tolerance * std::max(std::abs(prev), 1e-12)) {
                result.converged = true;
                ++iter;
                break;
            }
        }
    }
    result.iterations = iter;
    return result;
}

}  // namespace ngc
