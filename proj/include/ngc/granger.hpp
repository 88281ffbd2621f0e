#pragma once

// Granger-causality structure extracted from trained componentwise models:
// edge statistics (input-group norms), binary adjacency from the exact-zero
// test, and per-edge lag selection.

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ngc/clstm.hpp"
#include "ngc/cmlp.hpp"
#include "ngc/nn_core.hpp"
#include "ngc/penalties.hpp"

namespace ngc {

/// Row i = output series, column j = input series. adjacency[i][j] is true
/// exactly when edgeStats[i][j] > 0 (the prox makes dead groups bit-exact
/// zero, so no epsilon is involved). selectedLag is 0 on non-edges; for
/// cLSTM-derived graphs an edge carries lag 1 (the recurrence has no lag
/// axis).
struct GrangerGraph {
    std::size_t p = 0;
    std::vector<std::string> names;
    Matrix edge_stats;              // p x p
    std::vector<std::uint8_t> adjacency;  // p x p, row-major
    std::vector<int> selected_lag;  // p x p, row-major

    bool edge(std::size_t i, std::size_t j) const { return adjacency[i * p + j] != 0; }
    int lag(std::size_t i, std::size_t j) const { return selected_lag[i * p + j]; }

    std::size_t edge_count() const {
        std::size_t n = 0;
        for (auto a : adjacency) n += a != 0;
        return n;
    }
};

inline GrangerGraph make_empty_graph(const std::vector<std::string>& names) {
    GrangerGraph g;
    g.p = names.size();
    g.names = names;
    g.edge_stats = Matrix(g.p, g.p);
    g.adjacency.assign(g.p * g.p, 0);
    g.selected_lag.assign(g.p * g.p, 0);
    return g;
}

inline void validate_graph(const GrangerGraph& g) {
    if (g.names.size() != g.p || g.edge_stats.rows != g.p || g.edge_stats.cols != g.p ||
        g.adjacency.size() != g.p * g.p || g.selected_lag.size() != g.p * g.p)
        throw std::invalid_argument("granger graph: inconsistent shapes");
    for (std::size_t i = 0; i < g.p * g.p; ++i) {
        const bool has_edge = g.edge_stats.data[i] > 0.0;
        if (has_edge != (g.adjacency[i] != 0))
            throw std::invalid_argument("granger graph: adjacency must equal edgeStats > 0");
        if ((g.selected_lag[i] == 0) == has_edge)
            throw std::invalid_argument("granger graph: selectedLag must be 0 exactly on non-edges");
        if (g.edge_stats.data[i] < 0.0)
            throw std::invalid_argument("granger graph: negative edge statistic");
    }
}

/// Graph from p fitted cMLP models (model i predicts series i).
inline GrangerGraph extract_graph(const std::vector<CmlpNet>& models,
                                  const std::vector<std::string>& names) {
    if (models.size() != names.size())
        throw std::invalid_argument("extract_graph: one model per series required");
    GrangerGraph g = make_empty_graph(names);
    for (std::size_t i = 0; i < models.size(); ++i) {
        if (models[i].p != g.p)
            throw std::invalid_argument("extract_graph: model " + std::to_string(i) +
                                        " series count mismatch");
        const InputGroupView view = input_group_view(models[i]);
        const Vector norms = group_norms(view);
        for (std::size_t j = 0; j < g.p; ++j) {
            g.edge_stats(i, j) = norms[j];
            g.adjacency[i * g.p + j] = norms[j] > 0.0;
            int lag = 0;
            for (std::size_t k = models[i].lag; k-- > 0;) {
                if (l2_norm(view.group(j) + k * view.block_len, view.block_len) > 0.0) {
                    lag = static_cast<int>(k) + 1;
                    break;
                }
            }
            g.selected_lag[i * g.p + j] = lag;
        }
    }
    return g;
}

/// Graph from p fitted cLSTM models; an edge's lag is reported as 1.
inline GrangerGraph extract_graph(const std::vector<ClstmNet>& models,
                                  const std::vector<std::string>& names) {
    if (models.size() != names.size())
        throw std::invalid_argument("extract_graph: one model per series required");
    GrangerGraph g = make_empty_graph(names);
    for (std::size_t i = 0; i < models.size(); ++i) {
        if (models[i].p != g.p)
            throw std::invalid_argument("extract_graph: model " + std::to_string(i) +
                                        " series count mismatch");
        const Vector norms = group_norms(input_group_view(models[i]));
        for (std::size_t j = 0; j < g.p; ++j) {
            g.edge_stats(i, j) = norms[j];
            g.adjacency[i * g.p + j] = norms[j] > 0.0;
            g.selected_lag[i * g.p + j] = norms[j] > 0.0 ? 1 : 0;
        }
    }
    return g;
}

/// Row-standardized and optionally merged edge weights for visualization.
/// grouping maps every raw series index to a merged node label.
struct StandardizedGraph {
    std::vector<std::string> group_names;
    Matrix edge_weights;  // group x group, values in [0,1]
    std::vector<std::string> raw_names;
    std::vector<std::size_t> group_of;  // raw series index -> group index
};

inline StandardizedGraph standardize_graph(const GrangerGraph& g,
                                           const std::vector<std::string>& grouping = {}) {
    validate_graph(g);
    std::vector<std::string> labels = grouping;
    if (labels.empty()) {
        labels = g.names;  // trivial grouping: one node per series
    }
    if (labels.size() != g.p)
        throw std::invalid_argument("standardize_graph: grouping must assign every series a label");

    StandardizedGraph out;
    out.raw_names = g.names;
    out.group_of.resize(g.p);
    std::map<std::string, std::size_t> index_of;
    for (std::size_t j = 0; j < g.p; ++j) {
        auto [it, inserted] = index_of.try_emplace(labels[j], out.group_names.size());
        if (inserted) out.group_names.push_back(labels[j]);
        out.group_of[j] = it->second;
    }
    const std::size_t ng = out.group_names.size();

    // Row standardization: divide each row by its max; all-zero rows stay zero.
    Matrix standardized(g.p, g.p);
    for (std::size_t i = 0; i < g.p; ++i) {
        double mx = 0.0;
        for (std::size_t j = 0; j < g.p; ++j) mx = std::max(mx, g.edge_stats(i, j));
        if (mx > 0.0)
            for (std::size_t j = 0; j < g.p; ++j) standardized(i, j) = g.edge_stats(i, j) / mx;
    }

    // Merge: average the standardized values over each group block.
    out.edge_weights = Matrix(ng, ng);
    Matrix counts(ng, ng);
    for (std::size_t i = 0; i < g.p; ++i)
        for (std::size_t j = 0; j < g.p; ++j) {
            out.edge_weights(out.group_of[i], out.group_of[j]) += standardized(i, j);
            counts(out.group_of[i], out.group_of[j]) += 1.0;
        }
    for (std::size_t i = 0; i < ng; ++i)
        for (std::size_t j = 0; j < ng; ++j)
            if (counts(i, j) > 0.0) out.edge_weights(i, j) /= counts(i, j);
    return out;
}

}  // namespace ngc
