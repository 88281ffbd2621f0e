#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ngc/clstm.hpp"
#include "ngc/nn_core.hpp"
#include "test_util.hpp"

using namespace ngc;

namespace {

ClstmNet zero_net(std::size_t p, std::size_t m) {
    return init_clstm(p, m, 0, InitScheme::Zeros, InitScheme::Zeros);
}

}  // namespace

TEST_CASE("lstm step on zero parameters", "[clstm]") {
    ClstmNet net = zero_net(2, 3);
    LstmState s0{Vector(3, 0.0), Vector(3, 0.0)};
    const LstmState s1 = lstm_step(net, {1.0, -4.0}, s0);
    for (double v : s1.c) CHECK(v == 0.0);
    for (double v : s1.h) CHECK(v == 0.0);

    // all gates sit at sigmoid(0) = 1/2
    LstmState carrying{Vector(3, 0.0), Vector{2.0, -1.0, 0.5}};
    const LstmState s2 = lstm_step(net, {0.0, 0.0}, carrying);
    for (std::size_t u = 0; u < 3; ++u) {
        CHECK(s2.c[u] == Catch::Approx(0.5 * carrying.c[u]).margin(1e-15));
        CHECK(s2.h[u] == Catch::Approx(0.5 * std::tanh(0.5 * carrying.c[u])).margin(1e-15));
    }
}

TEST_CASE("saturated forget gate preserves the cell", "[clstm]") {
    ClstmNet net = zero_net(1, 1);
    net.input_weights(0, 0) = 1e6;  // forget block row
    LstmState s0{Vector(1, 0.0), Vector(1, 2.0)};
    const LstmState s1 = lstm_step(net, {1.0}, s0);
    CHECK(std::abs(s1.c[0] - 2.0) <= 1e-6);
}

TEST_CASE("lstm step rejects shape mismatches", "[clstm]") {
    ClstmNet net = zero_net(2, 3);
    LstmState s{Vector(3, 0.0), Vector(3, 0.0)};
    CHECK_THROWS_AS(lstm_step(net, {1.0}, s), std::invalid_argument);
    LstmState bad{Vector(2, 0.0), Vector(3, 0.0)};
    CHECK_THROWS_AS(lstm_step(net, {1.0, 2.0}, bad), std::invalid_argument);
}

TEST_CASE("forward on zero net and determinism", "[clstm]") {
    ClstmNet net = zero_net(3, 2);
    Matrix rep(9, 3, 1.25);
    for (double v : clstm_forward(net, rep)) CHECK(v == 0.0);

    const ClstmNet rnd = testutil::random_clstm(3, 4, 17);
    const Vector a = clstm_forward(rnd, rep);
    const Vector b = clstm_forward(rnd, rep);
    CHECK(a == b);
    CHECK(a.size() == 8);

    Matrix tooShort(1, 3, 0.0);
    CHECK_THROWS_AS(clstm_forward(rnd, tooShort), std::invalid_argument);
}

TEST_CASE("zeroed input column makes predictions invariant to that series", "[clstm]") {
    ClstmNet net = testutil::random_clstm(4, 3, 23);
    const std::size_t j = 1;
    for (std::size_t r = 0; r < 4 * net.hidden; ++r) net.input_weights(r, j) = 0.0;

    TimeSeriesPanel panel = testutil::random_panel(4, {12}, 3);
    Matrix original = panel.replicates[0];
    Matrix tampered = original;
    Rng rng(71);
    for (std::size_t t = 0; t < tampered.rows; ++t) tampered(t, j) = rng.uniform(-50.0, 50.0);
    CHECK(clstm_forward(net, original) == clstm_forward(net, tampered));
}

TEST_CASE("bptt gradient vanishes at a zero-residual configuration", "[clstm]") {
    ClstmNet net = zero_net(2, 2);
    TimeSeriesPanel panel;
    panel.names = {"a", "b"};
    panel.replicates.emplace_back(10, 2, 0.0);
    for (double v : clstm_flatten(clstm_grad(net, panel, 1))) CHECK(v == 0.0);
}

TEST_CASE("bptt gradient matches finite differences", "[clstm]") {
    ClstmNet net = testutil::random_clstm(3, 4, 41);
    const TimeSeriesPanel panel = testutil::random_panel(3, {15}, 6);
    const std::size_t target = 2;
    const ClstmNet analytic = clstm_grad(net, panel, target);
    auto f = [&](const Vector& theta) {
        ClstmNet probe = net;
        clstm_unflatten(probe, theta);
        return clstm_loss(probe, panel, target);
    };
    const Vector fd = finite_diff_grad(f, clstm_flatten(net));
    CHECK(testutil::max_rel_error(clstm_flatten(analytic), fd) <= 1e-6);
}

TEST_CASE("gradient over a panel is the sum of per-replicate gradients", "[clstm]") {
    const ClstmNet net = testutil::random_clstm(2, 3, 10);
    TimeSeriesPanel ab = testutil::random_panel(2, {9, 14}, 31);
    TimeSeriesPanel a{ab.names, {ab.replicates[0]}};
    TimeSeriesPanel b{ab.names, {ab.replicates[1]}};
    const Vector gab = clstm_flatten(clstm_grad(net, ab, 0));
    const Vector ga = clstm_flatten(clstm_grad(net, a, 0));
    const Vector gb = clstm_flatten(clstm_grad(net, b, 0));
    for (std::size_t i = 0; i < gab.size(); ++i)
        CHECK(gab[i] == Catch::Approx(ga[i] + gb[i]).margin(1e-12));
}

TEST_CASE("hidden states stay bounded", "[clstm]") {
    const ClstmNet net = testutil::random_clstm(2, 3, 19);
    Rng rng(5);
    LstmState s{Vector(3, 0.0), Vector(3, 0.0)};
    for (int t = 1; t <= 200; ++t) {
        Vector x{rng.normal(), rng.normal()};
        s = lstm_step(net, x, s);
        for (double h : s.h) CHECK(std::abs(h) < 1.0);
        for (double c : s.c) CHECK(std::abs(c) <= static_cast<double>(t) + 1e-12);
    }
}

TEST_CASE("segment_series splits and keeps usable remainders", "[clstm]") {
    Matrix series(2024, 3);
    for (std::size_t i = 0; i < series.data.size(); ++i) series.data[i] = static_cast<double>(i);
    const auto segs = segment_series(series, 20);
    REQUIRE(segs.size() == 102);
    for (std::size_t s = 0; s < 101; ++s) CHECK(segs[s].rows == 20);
    CHECK(segs[101].rows == 4);

    // concatenation preserves order and content
    std::size_t row = 0;
    for (const auto& seg : segs)
        for (std::size_t t = 0; t < seg.rows; ++t, ++row)
            CHECK(seg(t, 1) == series(row, 1));

    CHECK(segment_series(Matrix(40, 2), 20).size() == 2);
    CHECK(segment_series(Matrix(21, 2), 20).size() == 1);
    CHECK_THROWS_AS(segment_series(series, 1), std::invalid_argument);
}

TEST_CASE("flatten and unflatten round-trip", "[clstm]") {
    const ClstmNet net = testutil::random_clstm(3, 2, 93);
    ClstmNet other = zero_net(3, 2);
    clstm_unflatten(other, clstm_flatten(net));
    CHECK(clstm_flatten(other) == clstm_flatten(net));
}
