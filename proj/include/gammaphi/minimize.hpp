#pragma once

#include <Eigen/Core>

#include <functional>

namespace gammaphi {

struct MinimizeOptions {
    int max_iterations{5000};
    double value_tol{1e-10};
    double gradient_tol{1e-12};
};

struct MinimizeResult {
    Eigen::VectorXd x;
    double value{0.0};
    int iterations{0};
    bool converged{false};
};

using Objective = std::function<double(const Eigen::VectorXd&)>;
using Gradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// BFGS with backtracking Armijo line search. Non-finite trial values are
/// rejected by the line search. Zero-dimensional problems return x0.
MinimizeResult minimize_bfgs(const Objective& f, const Gradient& grad,
                             Eigen::VectorXd x0, const MinimizeOptions& opts = {});

/// Derivative-free fallback for when BFGS stalls.
MinimizeResult minimize_nelder_mead(const Objective& f, Eigen::VectorXd x0,
                                    const MinimizeOptions& opts = {});

/// BFGS first, Nelder-Mead polish when it fails to converge.
MinimizeResult minimize(const Objective& f, const Gradient& grad, Eigen::VectorXd x0,
                        const MinimizeOptions& opts = {});

}  // namespace gammaphi
