#pragma once

// Shared builders for randomized tests.

#include <string>
#include <vector>

#include "ngc/clstm.hpp"
#include "ngc/cmlp.hpp"
#include "ngc/nn_core.hpp"
#include "ngc/panel.hpp"

namespace testutil {

inline ngc::TimeSeriesPanel random_panel(std::size_t p, const std::vector<std::size_t>& lengths,
                                         std::uint64_t seed, double scale = 1.0) {
    ngc::Rng rng(seed);
    ngc::TimeSeriesPanel panel;
    for (std::size_t j = 0; j < p; ++j) panel.names.push_back("x" + std::to_string(j + 1));
    for (std::size_t len : lengths) {
        ngc::Matrix rep(len, p);
        for (auto& v : rep.data) v = scale * rng.normal();
        panel.replicates.push_back(std::move(rep));
    }
    return panel;
}

inline ngc::CmlpNet random_cmlp(std::size_t p, std::size_t lag, std::size_t hidden,
                                std::size_t layers, ngc::Activation act, std::uint64_t seed) {
    return ngc::init_cmlp(p, lag, hidden, layers, act, seed);
}

inline ngc::ClstmNet random_clstm(std::size_t p, std::size_t m, std::uint64_t seed) {
    return ngc::init_clstm(p, m, seed);
}

/// Worst-entry error of a against b, scaled by the larger of 1 and b's
/// largest magnitude (absolute near zero, relative otherwise).
inline double max_rel_error(const ngc::Vector& a, const ngc::Vector& b) {
    double scale = 1.0;
    for (double v : b) scale = std::max(scale, std::abs(v));
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
    return worst;
}

}  // namespace testutil
