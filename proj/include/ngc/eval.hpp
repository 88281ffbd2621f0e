#pragma once

// Lambda-sweep orchestration across all p componentwise fits, and ROC / PR
// curve construction against a ground-truth graph. Each candidate edge is
// scored by the largest lambda at which it survives; the sweep itself is the
// ranker, so edge statistics from different lambda fits are never compared
// directly (only to break ties among edges with the same survival point).

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ngc/clstm.hpp"
#include "ngc/cmlp.hpp"
#include "ngc/granger.hpp"
#include "ngc/nn_core.hpp"
#include "ngc/optimizer.hpp"
#include "ngc/panel.hpp"
#include "ngc/parallel.hpp"
#include "ngc/penalties.hpp"

namespace ngc {

enum class ModelFamily { Cmlp, Clstm };

inline ModelFamily model_family_from_string(const std::string& s) {
    if (s == "cmlp") return ModelFamily::Cmlp;
    if (s == "clstm") return ModelFamily::Clstm;
    throw std::invalid_argument("unknown model family: " + s);
}

inline std::string to_string(ModelFamily f) {
    return f == ModelFamily::Cmlp ? "cmlp" : "clstm";
}

/// Everything needed to fit one componentwise model per series: architecture,
/// penalty family (lambda supplied per sweep point) and optimizer constants.
struct FitPlan {
    ModelFamily family = ModelFamily::Cmlp;
    std::size_t lag = 1;        // cMLP max lag K
    std::size_t hidden = 10;    // H or m
    std::size_t layers = 1;     // cMLP hidden layer count
    Activation activation = Activation::Tanh;
    PenaltyFamily penalty = PenaltyFamily::Hier;
    double mixed_alpha = 0.5;
    double forget_bias = 0.0;
    std::size_t segment_length = 0;  // cLSTM: 0 = full BPTT, else truncate via segmentation
    FitConfig optimizer;
};

struct SweepResult {
    Vector lambdas;                      // strictly decreasing
    std::vector<GrangerGraph> per_lambda;
    GrangerGraph ground_truth;           // p = 0 until supplied (eval stage)
    bool include_diagonal = false;
    std::vector<std::vector<std::size_t>> iterations;  // [lambda][series]

    bool has_truth() const { return ground_truth.p > 0; }
};

struct CurveSummary {
    std::vector<std::pair<double, double>> roc_points;  // (FPR, TPR)
    std::vector<std::pair<double, double>> pr_points;   // (recall, precision)
    double auroc = 0.0;
    double aupr = 0.0;
};

namespace detail {

inline void check_lambda_grid(const Vector& grid) {
    if (grid.empty()) throw std::invalid_argument("lambda grid: empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw std::invalid_argument("lambda grid: entries must be positive");
        if (i > 0 && grid[i] >= grid[i - 1])
            throw std::invalid_argument("lambda grid: entries must be strictly decreasing");
    }
}

template <class Model>
Model init_model_for_series(const FitPlan& plan, std::size_t p, std::uint64_t seed);

template <>
inline CmlpNet init_model_for_series<CmlpNet>(const FitPlan& plan, std::size_t p,
                                              std::uint64_t seed) {
    return init_cmlp(p, plan.lag, plan.hidden, plan.layers, plan.activation, seed,
                     InitScheme::Zeros, InitScheme::GlorotUniform);
}

template <>
inline ClstmNet init_model_for_series<ClstmNet>(const FitPlan& plan, std::size_t p,
                                                std::uint64_t seed) {
    return init_clstm(p, plan.hidden, seed, InitScheme::Zeros, InitScheme::GlorotUniform,
                      plan.forget_bias);
}

// Per-series warm-started descent down the lambda grid. Writes one graph row
// per lambda into rows[lambda][series slot] captured structures.
template <class Model>
void sweep_series(const FitPlan& plan, const TimeSeriesPanel& panel, std::size_t series,
                  const Vector& grid, std::vector<std::vector<FitResult<Model>>>& fits) {
    Model model = init_model_for_series<Model>(plan, panel.series_count(),
                                               mix_seed(plan.optimizer.seed, series));
    PenaltySpec spec{plan.penalty, 0.0, plan.mixed_alpha};
    for (std::size_t li = 0; li < grid.size(); ++li) {
        spec.lambda = grid[li];
        FitResult<Model> fit = prox_grad_fit(model, panel, series, spec, plan.optimizer);
        model = fit.params;  // warm start for the next lambda
        fits[li][series] = std::move(fit);
    }
}

template <class Model>
SweepResult run_sweep(const FitPlan& plan, const TimeSeriesPanel& panel, const Vector& grid) {
    const std::size_t p = panel.series_count();
    std::vector<std::vector<FitResult<Model>>> fits(grid.size());
    for (auto& per_lambda : fits) per_lambda.resize(p);
    parallel_for_index(p, [&](std::size_t series) {
        try {
            sweep_series<Model>(plan, panel, series, grid, fits);
        } catch (const std::exception& e) {
            throw std::runtime_error("sweep: series " + std::to_string(series) + ": " + e.what());
        }
    });
    SweepResult result;
    result.lambdas = grid;
    result.iterations.resize(grid.size());
    for (std::size_t li = 0; li < grid.size(); ++li) {
        std::vector<Model> models;
        models.reserve(p);
        result.iterations[li].resize(p);
        for (std::size_t s = 0; s < p; ++s) {
            models.push_back(std::move(fits[li][s].params));
            result.iterations[li][s] = fits[li][s].iterations;
        }
        result.per_lambda.push_back(extract_graph(models, panel.names));
    }
    return result;
}

}  // namespace detail

/// Largest first-prox-step survival threshold over all series, used as the
/// top of the default lambda grid.
inline double panel_lambda_max(const FitPlan& plan, const TimeSeriesPanel& panel) {
    panel.validate();
    const std::size_t p = panel.series_count();
    Vector per_series(p, 0.0);
    const TimeSeriesPanel* fit_panel = &panel;
    TimeSeriesPanel segmented;
    if (plan.family == ModelFamily::Clstm && plan.segment_length > 0) {
        segmented = segment_panel(panel, plan.segment_length);
        fit_panel = &segmented;
    }
    parallel_for_index(p, [&](std::size_t series) {
        if (plan.family == ModelFamily::Cmlp) {
            CmlpNet net = detail::init_model_for_series<CmlpNet>(plan, p,
                                                                 mix_seed(plan.optimizer.seed, series));
            per_series[series] = compute_lambda_max(net, *fit_panel, series, plan.optimizer);
        } else {
            ClstmNet net = detail::init_model_for_series<ClstmNet>(plan, p,
                                                                   mix_seed(plan.optimizer.seed, series));
            per_series[series] = compute_lambda_max(net, *fit_panel, series, plan.optimizer);
        }
    });
    double lmax = 0.0;
    for (double v : per_series) lmax = std::max(lmax, v);
    if (!(lmax > 0.0)) throw std::runtime_error("lambda_max: zero input-group gradient everywhere");
    return lmax;
}

/// Log-spaced grid from lambda_max down to lambda_max / ratio.
inline Vector log_lambda_grid(double lambda_max, std::size_t count = 20, double ratio = 100.0) {
    if (count == 0 || !(lambda_max > 0.0) || !(ratio > 1.0))
        throw std::invalid_argument("log_lambda_grid: bad arguments");
    Vector grid(count);
    if (count == 1) {
        grid[0] = lambda_max;
        return grid;
    }
    const double step = std::log(ratio) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) grid[i] = lambda_max * std::exp(-step * static_cast<double>(i));
    return grid;
}

/// Fits all p componentwise models at every lambda (descending, warm-started
/// per series) and extracts one graph per lambda. Deterministic given the
/// plan's seed; series fits run in parallel.
inline SweepResult lambda_sweep(const TimeSeriesPanel& panel, const FitPlan& plan,
                                const Vector& lambda_grid) {
    panel.validate();
    detail::check_lambda_grid(lambda_grid);
    if (plan.family == ModelFamily::Clstm) {
        const TimeSeriesPanel* fit_panel = &panel;
        TimeSeriesPanel segmented;
        if (plan.segment_length > 0) {
            segmented = segment_panel(panel, plan.segment_length);
            fit_panel = &segmented;
        }
        return detail::run_sweep<ClstmNet>(plan, *fit_panel, lambda_grid);
    }
    return detail::run_sweep<CmlpNet>(plan, panel, lambda_grid);
}

/// All p componentwise models fitted at a single lambda, plus the extracted
/// graph. Only the container matching the plan's family is filled.
struct FitAllResult {
    std::vector<CmlpNet> cmlp;
    std::vector<ClstmNet> clstm;
    GrangerGraph graph;
    std::vector<std::size_t> iterations;
};

inline FitAllResult fit_all_series(const TimeSeriesPanel& panel, const FitPlan& plan,
                                   double lambda) {
    panel.validate();
    if (!(lambda >= 0.0)) throw std::invalid_argument("fit_all_series: lambda must be nonnegative");
    const std::size_t p = panel.series_count();
    FitAllResult out;
    out.iterations.resize(p);
    const TimeSeriesPanel* fit_panel = &panel;
    TimeSeriesPanel segmented;
    if (plan.family == ModelFamily::Clstm && plan.segment_length > 0) {
        segmented = segment_panel(panel, plan.segment_length);
        fit_panel = &segmented;
    }
    const PenaltySpec spec{plan.penalty, lambda, plan.mixed_alpha};
    if (plan.family == ModelFamily::Cmlp) {
        out.cmlp.resize(p);
        parallel_for_index(p, [&](std::size_t series) {
            CmlpNet net = detail::init_model_for_series<CmlpNet>(plan, p,
                                                                 mix_seed(plan.optimizer.seed, series));
            auto fit = prox_grad_fit(net, *fit_panel, series, spec, plan.optimizer);
            out.cmlp[series] = std::move(fit.params);
            out.iterations[series] = fit.iterations;
        });
        out.graph = extract_graph(out.cmlp, panel.names);
    } else {
        out.clstm.resize(p);
        parallel_for_index(p, [&](std::size_t series) {
            ClstmNet net = detail::init_model_for_series<ClstmNet>(plan, p,
                                                                   mix_seed(plan.optimizer.seed, series));
            auto fit = prox_grad_fit(net, *fit_panel, series, spec, plan.optimizer);
            out.clstm[series] = std::move(fit.params);
            out.iterations[series] = fit.iterations;
        });
        out.graph = extract_graph(out.clstm, panel.names);
    }
    return out;
}

namespace detail {

struct EdgeScore {
    double survival = 0.0;   // largest lambda at which the edge is present (0 = never)
    double tiebreak = 0.0;   // edge statistic at the smallest lambda
    bool positive = false;   // ground-truth label

    bool same_score(const EdgeScore& o) const {
        return survival == o.survival && tiebreak == o.tiebreak;
    }
};

inline double trapezoid(const std::vector<std::pair<double, double>>& pts) {
    double area = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        area += (pts[i].first - pts[i - 1].first) * (pts[i].second + pts[i - 1].second) / 2.0;
    return area;
}

}  // namespace detail

/// ROC and PR curves from a sweep with ground truth attached. Candidate edges
/// are all ordered pairs (diagonal excluded unless the sweep says otherwise);
/// curves walk the distinct score levels from strictest to loosest.
inline CurveSummary score_sweep(const SweepResult& sweep) {
    if (!sweep.has_truth()) throw std::invalid_argument("score_sweep: ground truth missing");
    if (sweep.per_lambda.empty()) throw std::invalid_argument("score_sweep: empty sweep");
    detail::check_lambda_grid(sweep.lambdas);
    if (sweep.per_lambda.size() != sweep.lambdas.size())
        throw std::invalid_argument("score_sweep: one graph per lambda required");
    const std::size_t p = sweep.ground_truth.p;
    for (const auto& g : sweep.per_lambda)
        if (g.p != p) throw std::invalid_argument("score_sweep: graph size mismatch");

    std::vector<detail::EdgeScore> scores;
    std::size_t positives = 0, negatives = 0;
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) {
            if (i == j && !sweep.include_diagonal) continue;
            detail::EdgeScore s;
            for (std::size_t li = 0; li < sweep.lambdas.size(); ++li)
                if (sweep.per_lambda[li].edge(i, j)) {
                    s.survival = sweep.lambdas[li];
                    break;  // grid is descending; first hit is the largest lambda
                }
            s.tiebreak = sweep.per_lambda.back().edge_stats(i, j);
            s.positive = sweep.ground_truth.edge(i, j);
            (s.positive ? positives : negatives) += 1;
            scores.push_back(s);
        }
    if (positives == 0 || negatives == 0)
        throw std::invalid_argument("score_sweep: ground truth needs at least one positive and one negative edge");

    std::sort(scores.begin(), scores.end(), [](const detail::EdgeScore& a, const detail::EdgeScore& b) {
        if (a.survival != b.survival) return a.survival > b.survival;
        return a.tiebreak > b.tiebreak;
    });

    CurveSummary out;
    out.roc_points.emplace_back(0.0, 0.0);
    double tp = 0.0, fp = 0.0;
    const double np = static_cast<double>(positives), nn = static_cast<double>(negatives);
    std::size_t idx = 0;
    bool first_group = true;
    while (idx < scores.size()) {
        std::size_t end = idx;
        while (end < scores.size() && scores[end].same_score(scores[idx])) ++end;
        for (std::size_t k = idx; k < end; ++k)
            (scores[k].positive ? tp : fp) += 1.0;
        out.roc_points.emplace_back(fp / nn, tp / np);
        const double recall = tp / np;
        const double precision = (tp + fp) > 0.0 ? tp / (tp + fp) : 1.0;
        if (first_group) {
            out.pr_points.emplace_back(0.0, precision);
            first_group = false;
        }
        out.pr_points.emplace_back(recall, precision);
        idx = end;
    }
    if (out.roc_points.back() != std::make_pair(1.0, 1.0)) out.roc_points.emplace_back(1.0, 1.0);
    out.auroc = detail::trapezoid(out.roc_points);
    out.aupr = detail::trapezoid(out.pr_points);
    return out;
}

}  // namespace ngc
