#pragma once

// Multivariate time-series panel: one or more replicate series over a shared
// set of variables. Loss windows never cross replicate boundaries.

#include <stdexcept>
#include <string>
#include <vector>

#include "ngc/nn_core.hpp"

namespace ngc {

struct TimeSeriesPanel {
    std::vector<std::string> names;
    std::vector<Matrix> replicates;  // each (length_r x p)

    std::size_t series_count() const { return names.size(); }
    std::size_t replicate_count() const { return replicates.size(); }

    std::size_t total_rows() const {
        std::size_t n = 0;
        for (const auto& r : replicates) n += r.rows;
        return n;
    }

    void validate() const {
        const std::size_t p = names.size();
        if (p == 0) throw std::invalid_argument("panel: no series");
        if (replicates.empty()) throw std::invalid_argument("panel: no replicates");
        for (std::size_t r = 0; r < replicates.size(); ++r) {
            if (replicates[r].cols != p)
                throw std::invalid_argument("panel: replicate " + std::to_string(r) +
                                            " has " + std::to_string(replicates[r].cols) +
                                            " columns, expected " + std::to_string(p));
            if (replicates[r].rows < 2)
                throw std::invalid_argument("panel: replicate " + std::to_string(r) +
                                            " shorter than 2 rows");
            if (!all_finite(replicates[r]))
                throw std::invalid_argument("panel: replicate " + std::to_string(r) +
                                            " contains non-finite values");
        }
    }
};

/// Per-series mean/std over all replicates pooled; constant series keep
/// scale 1 so standardization never divides by zero.
struct PanelScaling {
    Vector mean;
    Vector std;
};

inline PanelScaling compute_scaling(const TimeSeriesPanel& panel) {
    const std::size_t p = panel.series_count();
    PanelScaling s{Vector(p, 0.0), Vector(p, 1.0)};
    const double n = static_cast<double>(panel.total_rows());
    for (const auto& rep : panel.replicates)
        for (std::size_t t = 0; t < rep.rows; ++t)
            for (std::size_t j = 0; j < p; ++j) s.mean[j] += rep(t, j);
    for (std::size_t j = 0; j < p; ++j) s.mean[j] /= n;
    Vector var(p, 0.0);
    for (const auto& rep : panel.replicates)
        for (std::size_t t = 0; t < rep.rows; ++t)
            for (std::size_t j = 0; j < p; ++j) {
                const double d = rep(t, j) - s.mean[j];
                var[j] += d * d;
            }
    for (std::size_t j = 0; j < p; ++j) {
        const double sd = std::sqrt(var[j] / n);
        s.std[j] = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

inline TimeSeriesPanel apply_scaling(const TimeSeriesPanel& panel, const PanelScaling& s) {
    TimeSeriesPanel out = panel;
    for (auto& rep : out.replicates)
        for (std::size_t t = 0; t < rep.rows; ++t)
            for (std::size_t j = 0; j < rep.cols; ++j)
                rep(t, j) = (rep(t, j) - s.mean[j]) / s.std[j];
    return out;
}

inline TimeSeriesPanel standardize_panel(const TimeSeriesPanel& panel, PanelScaling* out_scaling = nullptr) {
    PanelScaling s = compute_scaling(panel);
    if (out_scaling) *out_scaling = s;
    return apply_scaling(panel, s);
}

}  // namespace ngc
