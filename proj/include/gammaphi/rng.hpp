#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace gammaphi {

/// Seeded generator with hand-rolled distributions so that sampled values are
/// identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    int uniform_int(int n) { return static_cast<int>(gen_() % static_cast<std::uint64_t>(n)); }

    double exponential() { return -std::log(1.0 - uniform()); }

    /// Uniform (flat Dirichlet) sample from the interior of the k-simplex.
    Eigen::VectorXd dirichlet(int k) {
        Eigen::VectorXd w(k);
        for (int i = 0; i < k; ++i) w[i] = exponential();
        w /= w.sum();
        return w;
    }

    /// Fisher-Yates permutation of {0, ..., k-1}.
    std::vector<int> permutation(int k) {
        std::vector<int> p(k);
        for (int i = 0; i < k; ++i) p[i] = i;
        for (int i = k - 1; i > 0; --i) std::swap(p[i], p[uniform_int(i + 1)]);
        return p;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace gammaphi
