#include <gammaphi/minimize.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace gammaphi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool usable(double v) { return std::isfinite(v); }

}  // namespace

MinimizeResult minimize_bfgs(const Objective& f, const Gradient& grad, Eigen::VectorXd x0,
                             const MinimizeOptions& opts) {
    MinimizeResult res;
    res.x = x0;
    res.value = f(x0);
    if (x0.size() == 0) {
        res.converged = usable(res.value);
        return res;
    }
    if (!usable(res.value)) return res;

    const auto n = x0.size();
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd x = x0;
    Eigen::VectorXd g = grad(x);
    double fx = res.value;

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        res.iterations = iter + 1;
        if (!g.allFinite()) break;
        if (g.lpNorm<Eigen::Infinity>() < opts.gradient_tol) {
            res.converged = true;
            break;
        }
        Eigen::VectorXd d = -(H * g);
        double slope = g.dot(d);
        if (!(slope < 0.0)) {
            H.setIdentity();
            d = -g;
            slope = g.dot(d);
        }

        // Backtracking Armijo search.
        double step = 1.0;
        double ftrial = kInf;
        Eigen::VectorXd xtrial;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            xtrial = x + step * d;
            ftrial = f(xtrial);
            if (usable(ftrial) && ftrial <= fx + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // No progress along d; treat the current point as stationary.
            res.converged = true;
            break;
        }

        Eigen::VectorXd gnew = grad(xtrial);
        if (!gnew.allFinite()) {
            x = xtrial;
            fx = ftrial;
            break;
        }
        const Eigen::VectorXd s = xtrial - x;
        const Eigen::VectorXd yv = gnew - g;
        const double sy = s.dot(yv);
        if (sy > 1e-14) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
            H = (I - rho * s * yv.transpose()) * H * (I - rho * yv * s.transpose()) +
                rho * s * s.transpose();
        } else {
            H.setIdentity();
        }

        const double improvement = fx - ftrial;
        x = xtrial;
        fx = ftrial;
        g = gnew;
        if (improvement <= opts.value_tol * (1.0 + std::abs(fx))) {
            res.converged = true;
            break;
        }
    }

    res.x = x;
    res.value = fx;
    return res;
}

MinimizeResult minimize_nelder_mead(const Objective& f, Eigen::VectorXd x0,
                                    const MinimizeOptions& opts) {
    MinimizeResult res;
    res.x = x0;
    res.value = f(x0);
    const int n = static_cast<int>(x0.size());
    if (n == 0) {
        res.converged = usable(res.value);
        return res;
    }

    const auto safe = [&](const Eigen::VectorXd& x) {
        const double v = f(x);
        return usable(v) ? v : kInf;
    };

    std::vector<Eigen::VectorXd> pts(n + 1, x0);
    std::vector<double> vals(n + 1);
    vals[0] = safe(x0);
    for (int i = 0; i < n; ++i) {
        pts[i + 1][i] += 0.5;
        vals[i + 1] = safe(pts[i + 1]);
    }

    std::vector<int> order(n + 1);
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        res.iterations = iter + 1;
        for (int i = 0; i <= n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
        const int best = order[0];
        const int worst = order[n];
        const int second_worst = order[n - 1];
        if (std::isfinite(vals[best]) &&
            vals[worst] - vals[best] <= opts.value_tol * (1.0 + std::abs(vals[best]))) {
            res.converged = true;
            break;
        }

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (int i = 0; i <= n; ++i) {
            if (i != worst) centroid += pts[i];
        }
        centroid /= static_cast<double>(n);

        const Eigen::VectorXd reflected = centroid + (centroid - pts[worst]);
        const double fr = safe(reflected);
        if (fr < vals[best]) {
            const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - pts[worst]);
            const double fe = safe(expanded);
            if (fe < fr) {
                pts[worst] = expanded;
                vals[worst] = fe;
            } else {
                pts[worst] = reflected;
                vals[worst] = fr;
            }
        } else if (fr < vals[second_worst]) {
            pts[worst] = reflected;
            vals[worst] = fr;
        } else {
            const Eigen::VectorXd contracted = centroid + 0.5 * (pts[worst] - centroid);
            const double fc = safe(contracted);
            if (fc < vals[worst]) {
                pts[worst] = contracted;
                vals[worst] = fc;
            } else {
                for (int i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
                    vals[i] = safe(pts[i]);
                }
            }
        }
    }

    int best = 0;
    for (int i = 1; i <= n; ++i) {
        if (vals[i] < vals[best]) best = i;
    }
    if (vals[best] <= res.value || !usable(res.value)) {
        res.x = pts[best];
        res.value = vals[best];
    }
    return res;
}

MinimizeResult minimize(const Objective& f, const Gradient& grad, Eigen::VectorXd x0,
                        const MinimizeOptions& opts) {
    MinimizeResult res = minimize_bfgs(f, grad, std::move(x0), opts);
    if (!res.converged) {
        MinimizeResult nm = minimize_nelder_mead(f, res.x, opts);
        if (nm.value <= res.value || !usable(res.value)) return nm;
    }
    return res;
}

}  // namespace gammaphi
