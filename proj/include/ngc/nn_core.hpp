#pragma once

// Dense numeric primitives shared by the componentwise network models:
// row-major matrices, a reproducible RNG, activation functions, parameter
// initialization and a central finite-difference gradient oracle.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ngc {

using Vector = std::vector<double>;

/// Row-major dense matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }

    bool same_shape(const Matrix& other) const {
        return rows == other.rows && cols == other.cols;
    }
};

inline bool all_finite(const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(x[i])) return false;
    return true;
}

inline bool all_finite(const Vector& v) { return all_finite(v.data(), v.size()); }
inline bool all_finite(const Matrix& m) { return all_finite(m.data.data(), m.data.size()); }

/// Deterministic random stream. All distributions are hand-rolled on top of
/// mt19937_64 so that identical seeds give bit-identical streams on any
/// standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 == 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

    /// Uniform integer in [0, n), rejection sampled to avoid modulo bias.
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % n;
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Mixes a base seed with a stream index so per-series fits get independent,
/// reproducible streams (splitmix64 finalizer).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

enum class Activation { Tanh, Sigmoid, Linear };

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double activate(Activation kind, double x) {
    switch (kind) {
        case Activation::Tanh: return std::tanh(x);
        case Activation::Sigmoid: return sigmoid(x);
        case Activation::Linear: return x;
    }
    throw std::logic_error("activate: unknown activation");
}

/// Derivative expressed through the activation output (valid for all three
/// kinds): tanh' = 1 - y^2, sigmoid' = y(1 - y), linear' = 1.
inline double activate_deriv_from_output(Activation kind, double y) {
    switch (kind) {
        case Activation::Tanh: return 1.0 - y * y;
        case Activation::Sigmoid: return y * (1.0 - y);
        case Activation::Linear: return 1.0;
    }
    throw std::logic_error("activate_deriv_from_output: unknown activation");
}

inline Vector activation(Activation kind, const Vector& x) {
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = activate(kind, x[i]);
    return out;
}

inline Activation activation_from_string(const std::string& s) {
    if (s == "tanh") return Activation::Tanh;
    if (s == "sigmoid") return Activation::Sigmoid;
    if (s == "linear") return Activation::Linear;
    throw std::invalid_argument("unknown activation: " + s);
}

inline std::string to_string(Activation a) {
    switch (a) {
        case Activation::Tanh: return "tanh";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Linear: return "linear";
    }
    return "?";
}

enum class InitScheme { GlorotUniform, Zeros };

/// Weight initialization: i.i.d. uniform on [-a, a] with a = sqrt(6/(rows+cols))
/// for the default scheme. Deterministic given the seed.
inline Matrix init_params(std::size_t rows, std::size_t cols, InitScheme scheme,
                          std::uint64_t seed) {
    if (rows == 0 || cols == 0)
        throw std::invalid_argument("init_params: zero dimension");
    Matrix m(rows, cols);
    if (scheme == InitScheme::Zeros) return m;
    Rng rng(seed);
    const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (double& w : m.data) w = rng.uniform(-a, a);
    return m;
}

inline Vector init_bias(std::size_t len) { return Vector(len, 0.0); }

/// Central finite differences (f(x+h e_i) - f(x-h e_i)) / 2h. Used as the
/// independent oracle against hand-written backpropagation.
inline Vector finite_diff_grad(const std::function<double(const Vector&)>& f,
                               const Vector& theta, double h = 1e-5) {
    if (!(h > 0.0)) throw std::invalid_argument("finite_diff_grad: h must be positive");
    Vector grad(theta.size());
    Vector probe = theta;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        probe[i] = theta[i] + h;
        const double fp = f(probe);
        probe[i] = theta[i] - h;
        const double fm = f(probe);
        probe[i] = theta[i];
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw std::runtime_error("finite_diff_grad: non-finite function value at coordinate " +
                                     std::to_string(i));
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

// Four-accumulator dot product: same result on every run (fixed association)
// while letting the compiler keep the pipeline full.
inline double dot(const double* a, const double* b, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

inline double dot(const Vector& a, const Vector& b) {
    return dot(a.data(), b.data(), a.size());
}

inline double l2_norm(const double* x, std::size_t n) {
    return std::sqrt(dot(x, x, n));
}

inline double l2_norm(const Vector& v) { return l2_norm(v.data(), v.size()); }

}  // namespace ngc
