// Test-only oracles, independent of the solver paths they check.
#pragma once

#include <gammaphi/risk.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace oracle {

using gammaphi::LossSpec;
using gammaphi::ProbVector;
using gammaphi::Vector;

inline double central_diff(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double forward_diff(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x)) / h;
}

inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                          double h) {
    Vector g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vector hi = x, lo = x;
        hi[i] += h;
        lo[i] -= h;
        g[i] = (f(hi) - f(lo)) / (2.0 * h);
    }
    return g;
}

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

/// Plain bisection; requires a sign change on [lo, hi].
inline double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) throw std::invalid_argument("bisect: no sign change on bracket");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = f(mid);
        if (fmid == 0.0) return mid;
        if (flo * fmid < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fmid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Brute-force conditional Bayes risk: dense grid over the free coordinates of
/// every descending-prefix active set, inactive coordinates parked far down.
/// Only uses conditional_risk, never the solver machinery.
inline double grid_bayes(const ProbVector& p, const LossSpec& spec, double lo = -10.0,
                         double hi = 10.0, double step = 0.01, double padding = 30.0) {
    const std::vector<int> order = p.descending_order();
    const int k = spec.k;
    double best = std::numeric_limits<double>::infinity();
    const int steps = static_cast<int>(std::round((hi - lo) / step));
    for (int l = 1; l <= k; ++l) {
        std::vector<int> idx(l - 1, 0);
        for (;;) {
            Vector v = Vector::Constant(k, -padding);
            v[order[0]] = 0.0;
            for (int i = 1; i < l; ++i) v[order[i]] = lo + step * idx[i - 1];
            const double value = conditional_risk(p, spec, v);
            if (value < best) best = value;
            int pos = 0;
            while (pos < l - 1) {
                if (++idx[pos] <= steps) break;
                idx[pos] = 0;
                ++pos;
            }
            if (pos == l - 1) break;
        }
    }
    return best;
}

}  // namespace oracle
