#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ngc/nn_core.hpp"

using namespace ngc;

TEST_CASE("activation values", "[nn_core]") {
    CHECK(activation(Activation::Sigmoid, {0.0})[0] == Catch::Approx(0.5).margin(1e-15));
    CHECK(activation(Activation::Tanh, {0.0})[0] == 0.0);
    CHECK(activation(Activation::Sigmoid, {std::log(3.0)})[0] == Catch::Approx(0.75).margin(1e-12));

    const Vector xs{-3.0, -0.5, 0.0, 0.1, 2.0};
    const Vector sig = activation(Activation::Sigmoid, xs);
    const Vector th = activation(Activation::Tanh, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK((sig[i] > 0.0 && sig[i] < 1.0));
        CHECK((th[i] > -1.0 && th[i] < 1.0));
    }
}

TEST_CASE("sigmoid symmetry property", "[nn_core]") {
    Rng rng(42);
    for (int i = 0; i < 1000; ++i) {
        const double x = rng.uniform(-20.0, 20.0);
        CHECK(std::abs(sigmoid(x) + sigmoid(-x) - 1.0) <= 1e-12);
    }
}

TEST_CASE("init_params glorot bound and determinism", "[nn_core]") {
    const Matrix m = init_params(2, 2, InitScheme::GlorotUniform, 7);
    const double bound = std::sqrt(6.0 / 4.0);
    for (double v : m.data) CHECK(std::abs(v) <= bound);

    const Matrix again = init_params(2, 2, InitScheme::GlorotUniform, 7);
    CHECK(m.data == again.data);

    const Matrix a = init_params(3, 5, InitScheme::GlorotUniform, 1);
    const Matrix b = init_params(3, 5, InitScheme::GlorotUniform, 2);
    CHECK(a.data != b.data);

    CHECK_THROWS_AS(init_params(0, 3, InitScheme::GlorotUniform, 1), std::invalid_argument);
    CHECK_THROWS_AS(init_params(3, 0, InitScheme::GlorotUniform, 1), std::invalid_argument);
}

TEST_CASE("finite differences on simple functions", "[nn_core]") {
    auto square = [](const Vector& th) { return th[0] * th[0]; };
    const Vector g1 = finite_diff_grad(square, {3.0}, 1e-5);
    CHECK(std::abs(g1[0] - 6.0) <= 1e-8);

    auto constant = [](const Vector&) { return 4.2; };
    const Vector g2 = finite_diff_grad(constant, {1.0, -2.0, 0.5});
    for (double v : g2) CHECK(std::abs(v) <= 1e-9);

    auto sig = [](const Vector& th) { return sigmoid(th[0]); };
    const Vector g3 = finite_diff_grad(sig, {0.0});
    CHECK(std::abs(g3[0] - 0.25) <= 1e-8);

    CHECK_THROWS_AS(finite_diff_grad(square, {1.0}, 0.0), std::invalid_argument);
    auto bad = [](const Vector& th) { return std::log(th[0]); };
    CHECK_THROWS_AS(finite_diff_grad(bad, {0.0}), std::runtime_error);
}

TEST_CASE("finite differences match analytic gradients of quadratics", "[nn_core]") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform_int(4));
        Vector lin(n), quad(n), theta(n);
        for (std::size_t i = 0; i < n; ++i) {
            lin[i] = rng.uniform(-2.0, 2.0);
            quad[i] = rng.uniform(-2.0, 2.0);
            theta[i] = rng.uniform(-3.0, 3.0);
        }
        auto poly = [&](const Vector& th) {
            double v = 1.5;
            for (std::size_t i = 0; i < n; ++i) v += lin[i] * th[i] + quad[i] * th[i] * th[i];
            return v;
        };
        const Vector fd = finite_diff_grad(poly, theta);
        for (std::size_t i = 0; i < n; ++i) {
            const double analytic = lin[i] + 2.0 * quad[i] * theta[i];
            CHECK(std::abs(fd[i] - analytic) <= 1e-7 * std::max(1.0, std::abs(analytic)));
        }
    }
}

TEST_CASE("rng streams are deterministic and well distributed", "[nn_core]") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.uniform() == b.uniform());
        CHECK(a.normal() == b.normal());
    }
    Rng c(5);
    double mean = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) mean += c.normal();
    mean /= n;
    CHECK(std::abs(mean) < 0.05);
}
