#pragma once

// Structured sparsity penalties on the input-weight groups, and their exact
// proximal operators. Thresholded groups come out bit-exact zero; that is
// what makes the inferred non-edges trustworthy.
//
// Families:
//   GROUP  lambda * sum_j ||stack of series j's blocks||_2
//   HIER   lambda * sum_j sum_k ||blocks k..K of series j||_2   (nested suffixes)
//   MIXED  lambda * sum_j [ alpha*||full stack|| + (1-alpha)*sum_k ||block k|| ]
//
// The cLSTM input view has a single block per series (the column of W) and
// admits GROUP only.

#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "ngc/clstm.hpp"
#include "ngc/cmlp.hpp"
#include "ngc/nn_core.hpp"

namespace ngc {

enum class PenaltyFamily { Group, Mixed, Hier };

inline PenaltyFamily penalty_family_from_string(const std::string& s) {
    if (s == "group") return PenaltyFamily::Group;
    if (s == "mixed") return PenaltyFamily::Mixed;
    if (s == "hier") return PenaltyFamily::Hier;
    throw std::invalid_argument("unknown penalty family: " + s);
}

inline std::string to_string(PenaltyFamily f) {
    switch (f) {
        case PenaltyFamily::Group: return "group";
        case PenaltyFamily::Mixed: return "mixed";
        case PenaltyFamily::Hier: return "hier";
    }
    return "?";
}

struct PenaltySpec {
    PenaltyFamily family = PenaltyFamily::Group;
    double lambda = 0.0;
    double mixed_alpha = 0.5;  // MIXED only

    void validate() const {
        if (lambda < 0.0) throw std::invalid_argument("penalty: lambda must be nonnegative");
        if (family == PenaltyFamily::Mixed && (mixed_alpha < 0.0 || mixed_alpha > 1.0))
            throw std::invalid_argument("penalty: mixed alpha must lie in [0,1]");
    }
};

enum class GroupViewKind { MlpLags, LstmColumn };

/// Input-weight groups laid out [series j][block k][element]. For the cMLP a
/// block is one lag's column W^{1k}_{:j} (length H); for the cLSTM there is a
/// single block per series, the column W_{:j} (length 4m).
struct InputGroupView {
    GroupViewKind kind = GroupViewKind::MlpLags;
    std::size_t series = 0;     // p
    std::size_t blocks = 0;     // K (1 for the cLSTM)
    std::size_t block_len = 0;  // H or 4m
    Vector data;

    std::size_t group_size() const { return blocks * block_len; }
    double* group(std::size_t j) { return data.data() + j * group_size(); }
    const double* group(std::size_t j) const { return data.data() + j * group_size(); }
};

inline InputGroupView input_group_view(const CmlpNet& net) {
    InputGroupView v;
    v.kind = GroupViewKind::MlpLags;
    v.series = net.p;
    v.blocks = net.lag;
    v.block_len = net.hidden;
    v.data.resize(v.series * v.group_size());
    std::size_t idx = 0;
    for (std::size_t j = 0; j < net.p; ++j)
        for (std::size_t k = 0; k < net.lag; ++k)
            for (std::size_t h = 0; h < net.hidden; ++h) v.data[idx++] = net.first_layer[k](h, j);
    return v;
}

inline InputGroupView input_group_view(const ClstmNet& net) {
    InputGroupView v;
    v.kind = GroupViewKind::LstmColumn;
    v.series = net.p;
    v.blocks = 1;
    v.block_len = 4 * net.hidden;
    v.data.resize(v.series * v.group_size());
    std::size_t idx = 0;
    for (std::size_t j = 0; j < net.p; ++j)
        for (std::size_t r = 0; r < 4 * net.hidden; ++r) v.data[idx++] = net.input_weights(r, j);
    return v;
}

inline void set_input_groups(CmlpNet& net, const InputGroupView& v) {
    if (v.series != net.p || v.blocks != net.lag || v.block_len != net.hidden)
        throw std::invalid_argument("set_input_groups: view shape mismatch");
    std::size_t idx = 0;
    for (std::size_t j = 0; j < net.p; ++j)
        for (std::size_t k = 0; k < net.lag; ++k)
            for (std::size_t h = 0; h < net.hidden; ++h) net.first_layer[k](h, j) = v.data[idx++];
}

inline void set_input_groups(ClstmNet& net, const InputGroupView& v) {
    if (v.series != net.p || v.blocks != 1 || v.block_len != 4 * net.hidden)
        throw std::invalid_argument("set_input_groups: view shape mismatch");
    std::size_t idx = 0;
    for (std::size_t j = 0; j < net.p; ++j)
        for (std::size_t r = 0; r < 4 * net.hidden; ++r) net.input_weights(r, j) = v.data[idx++];
}

namespace detail {

/// In-place group soft-threshold: v <- max(0, 1 - tau/||v||) * v, with exact
/// zeros at or below the threshold.
inline void soft_threshold_group(double* v, std::size_t n, double tau) {
    const double norm = l2_norm(v, n);
    if (norm <= tau) {
        std::memset(v, 0, n * sizeof(double));
        return;
    }
    const double scale = 1.0 - tau / norm;
    for (std::size_t i = 0; i < n; ++i) v[i] *= scale;
}

// Prox of the three families on one series' stacked blocks (K blocks of
// length B, contiguous).
inline void prox_group_series(double* g, std::size_t K, std::size_t B, double tau) {
    soft_threshold_group(g, K * B, tau);
}

// Nested suffixes, smallest group first: thresholding lag K alone, then
// K-1..K, ..., finally the whole stack. This composition is the exact prox
// of the hierarchical penalty.
inline void prox_hier_series(double* g, std::size_t K, std::size_t B, double tau) {
    for (std::size_t k = K; k-- > 0;) soft_threshold_group(g + k * B, (K - k) * B, tau);
}

// Sparse-group-lasso composition: per-block threshold at (1-alpha)*tau, then
// the full stack at alpha*tau.
inline void prox_mixed_series(double* g, std::size_t K, std::size_t B, double tau, double alpha) {
    for (std::size_t k = 0; k < K; ++k) soft_threshold_group(g + k * B, B, (1.0 - alpha) * tau);
    soft_threshold_group(g, K * B, alpha * tau);
}

inline void check_family_for_view(PenaltyFamily family, GroupViewKind kind) {
    if (kind == GroupViewKind::LstmColumn && family != PenaltyFamily::Group)
        throw std::invalid_argument("penalty: cLSTM input groups admit the group family only");
}

/// Applies the prox of tau * (penalty with unit lambda) to a raw view laid
/// out [series][block][element]. The optimizer runs this on the flat
/// parameter prefix directly.
inline void apply_prox_raw(PenaltyFamily family, double alpha, GroupViewKind kind, double* data,
                           std::size_t series, std::size_t K, std::size_t B, double tau) {
    check_family_for_view(family, kind);
    if (tau < 0.0) throw std::invalid_argument("prox: tau must be nonnegative");
    for (std::size_t j = 0; j < series; ++j) {
        double* g = data + j * K * B;
        switch (family) {
            case PenaltyFamily::Group: prox_group_series(g, K, B, tau); break;
            case PenaltyFamily::Hier: prox_hier_series(g, K, B, tau); break;
            case PenaltyFamily::Mixed: prox_mixed_series(g, K, B, tau, alpha); break;
        }
    }
}

inline double penalty_value_raw(PenaltyFamily family, double alpha, GroupViewKind kind,
                                const double* data, std::size_t series, std::size_t K,
                                std::size_t B) {
    check_family_for_view(family, kind);
    double total = 0.0;
    for (std::size_t j = 0; j < series; ++j) {
        const double* g = data + j * K * B;
        switch (family) {
            case PenaltyFamily::Group:
                total += l2_norm(g, K * B);
                break;
            case PenaltyFamily::Hier:
                for (std::size_t k = 0; k < K; ++k) total += l2_norm(g + k * B, (K - k) * B);
                break;
            case PenaltyFamily::Mixed: {
                double inner = 0.0;
                for (std::size_t k = 0; k < K; ++k) inner += l2_norm(g + k * B, B);
                total += alpha * l2_norm(g, K * B) + (1.0 - alpha) * inner;
                break;
            }
        }
    }
    return total;
}

}  // namespace detail

inline double penalty_value(const PenaltySpec& spec, const InputGroupView& view) {
    spec.validate();
    return spec.lambda * detail::penalty_value_raw(spec.family, spec.mixed_alpha, view.kind,
                                                   view.data.data(), view.series, view.blocks,
                                                   view.block_len);
}

inline InputGroupView prox_group(const InputGroupView& view, double tau) {
    InputGroupView out = view;
    detail::apply_prox_raw(PenaltyFamily::Group, 0.0, view.kind, out.data.data(), out.series,
                           out.blocks, out.block_len, tau);
    return out;
}

inline InputGroupView prox_hier(const InputGroupView& view, double tau) {
    InputGroupView out = view;
    detail::apply_prox_raw(PenaltyFamily::Hier, 0.0, view.kind, out.data.data(), out.series,
                           out.blocks, out.block_len, tau);
    return out;
}

inline InputGroupView prox_mixed(const InputGroupView& view, double tau, double alpha) {
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("prox_mixed: alpha must lie in [0,1]");
    InputGroupView out = view;
    detail::apply_prox_raw(PenaltyFamily::Mixed, alpha, view.kind, out.data.data(), out.series,
                           out.blocks, out.block_len, tau);
    return out;
}

/// Prox of tau * Omega for the spec's family (lambda is composed into tau by
/// the caller, keeping this module step-agnostic).
inline InputGroupView apply_prox(const PenaltySpec& spec, const InputGroupView& view, double tau) {
    InputGroupView out = view;
    detail::apply_prox_raw(spec.family, spec.mixed_alpha, view.kind, out.data.data(), out.series,
                           out.blocks, out.block_len, tau);
    return out;
}

/// Per-series L2 norm of the full stacked group; these are the Granger edge
/// statistics.
inline Vector group_norms(const InputGroupView& view) {
    Vector norms(view.series);
    for (std::size_t j = 0; j < view.series; ++j)
        norms[j] = l2_norm(view.group(j), view.group_size());
    return norms;
}

}  // namespace ngc
