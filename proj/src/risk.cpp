#include <gammaphi/risk.hpp>

#include <gammaphi/minimize.hpp>
#include <gammaphi/rng.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace gammaphi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSumTolerance = 1e-12;
constexpr double kSlackFloor = 1e-12;

}  // namespace

ProbVector::ProbVector(Vector w) : w_(std::move(w)) {
    if (w_.size() < 1) throw std::invalid_argument("ProbVector: empty");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < w_.size(); ++i) {
        if (!std::isfinite(w_[i]) || w_[i] < -kSumTolerance) {
            throw std::invalid_argument("ProbVector: entries must be non-negative");
        }
        if (w_[i] < 0.0) w_[i] = 0.0;  // tolerate -0 and rounding dust
        sum += w_[i];
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("ProbVector: entries must sum to 1");
    }
    if (std::abs(sum - 1.0) > kSumTolerance) w_ /= sum;
}

ProbVector ProbVector::uniform(int k) {
    if (k < 1) throw std::invalid_argument("ProbVector: k must be >= 1");
    return ProbVector(Vector::Constant(k, 1.0 / k));
}

bool ProbVector::on_boundary(double tol) const {
    for (Eigen::Index i = 0; i < w_.size(); ++i) {
        if (w_[i] <= tol) return true;
    }
    return false;
}

std::vector<int> ProbVector::descending_order() const {
    std::vector<int> order(w_.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return w_[a] > w_[b]; });
    return order;
}

ProbVector ProbVector::descending() const {
    return apply_permutation(*this, descending_order());
}

void ExtendedScore::canonicalize() {
    if (alpha.size() > 0) alpha.array() -= alpha.maxCoeff();
}

Vector ExtendedScore::realize(double depth) const {
    Vector v = Vector::Constant(k, -depth);
    for (std::size_t i = 0; i < active.size(); ++i) v[active[i]] = alpha[static_cast<Eigen::Index>(i)];
    return v;
}

namespace {

void validate_extended(const ProbVector& p, const LossSpec& spec, const ExtendedScore& e) {
    if (e.k != spec.k || p.k() != spec.k) {
        throw std::invalid_argument("extended_risk: dimension mismatch");
    }
    const int l = e.active_count();
    if (l < 1 || l > e.k) throw std::invalid_argument("extended_risk: active set size");
    if (e.alpha.size() != l) throw std::invalid_argument("extended_risk: alpha size");
    if (!e.alpha.allFinite()) throw std::invalid_argument("extended_risk: alpha must be finite");
    std::vector<bool> seen(e.k, false);
    for (int idx : e.active) {
        if (idx < 0 || idx >= e.k || seen[idx]) {
            throw std::invalid_argument("extended_risk: bad active index");
        }
        seen[idx] = true;
    }
}

/// p-weighted sum of loss components with the 0 * inf = 0 convention.
double weighted_components(const Vector& weights, const LossSpec& spec, const Vector& v) {
    const Vector components = loss_components(spec, v);
    double acc = 0.0;
    for (Eigen::Index y = 0; y < weights.size(); ++y) {
        if (weights[y] != 0.0) acc += weights[y] * components[y];
    }
    return acc;
}

/// Shared limit value of the inactive classes' gamma argument when they
/// diverge at a common rate: l terms at phi's sup plus the remaining
/// same-level differences at phi(0).
double inactive_argument(const LossSpec& spec, int active_count) {
    const double sup = phi_sup(spec.phi);
    const int same_level = spec.k - active_count - 1;
    if (std::isinf(sup)) return kInf;
    return active_count * sup + same_level * phi_eval(spec.phi, 0.0);
}

double inactive_residual(const ProbVector& p, const LossSpec& spec,
                         const std::vector<int>& active) {
    const int l = static_cast<int>(active.size());
    if (l == spec.k) return 0.0;
    std::vector<bool> is_active(spec.k, false);
    for (int idx : active) is_active[idx] = true;
    const double arg = inactive_argument(spec, l);
    double acc = 0.0;
    for (int y = 0; y < spec.k; ++y) {
        if (is_active[y] || p[y] == 0.0) continue;
        acc += p[y] * gamma_eval_extended(spec.gamma, arg);
    }
    return acc;
}

}  // namespace

double conditional_risk(const ProbVector& p, const LossSpec& spec,
                        const Eigen::Ref<const Vector>& v) {
    if (p.k() != spec.k) throw std::invalid_argument("conditional_risk: dimension mismatch");
    return weighted_components(p.weights(), spec, v);
}

Vector conditional_risk_gradient(const ProbVector& p, const LossSpec& spec,
                                 const Eigen::Ref<const Vector>& v) {
    if (p.k() != spec.k || v.size() != spec.k) {
        throw std::invalid_argument("conditional_risk_gradient: dimension mismatch");
    }
    if (!v.allFinite()) throw std::domain_error("conditional_risk_gradient: non-finite scores");
    const int k = spec.k;
    // Gamma_y = gamma'(sum_{j != y} phi(v_y - v_j))
    Vector big_gamma(k);
    for (int y = 0; y < k; ++y) {
        double acc = 0.0;
        for (int j = 0; j < k; ++j) {
            if (j != y) acc += phi_eval(spec.phi, v[y] - v[j]);
        }
        big_gamma[y] = gamma_deriv(spec.gamma, acc);
    }
    Vector g = Vector::Zero(k);
    for (int y = 0; y < k; ++y) {
        double own = 0.0;
        double cross = 0.0;
        for (int j = 0; j < k; ++j) {
            if (j == y) continue;
            own += phi_deriv(spec.phi, v[y] - v[j]);
            cross += p[j] * big_gamma[j] * phi_deriv(spec.phi, v[j] - v[y]);
        }
        g[y] = p[y] * big_gamma[y] * own - cross;
    }
    return g;
}

RiskDecomposition extended_risk(const ProbVector& p, const LossSpec& spec,
                                const ExtendedScore& e) {
    validate_extended(p, spec, e);
    const int l = e.active_count();

    RiskDecomposition dec;
    dec.S = 0.0;
    Vector sub(l);
    for (int i = 0; i < l; ++i) {
        sub[i] = p[e.active[i]];
        dec.S += sub[i];
    }
    // Conditional weights of the active classes; uniform placeholder when the
    // active set carries no mass (it then contributes nothing).
    dec.q = dec.S > 0.0 ? Vector(sub / dec.S) : Vector(Vector::Constant(l, 1.0 / l));

    LossSpec reduced = spec;
    reduced.k = l;
    double acc = 0.0;
    const Vector components = loss_components(reduced, e.alpha);
    for (int i = 0; i < l; ++i) {
        if (dec.q[i] != 0.0) acc += dec.q[i] * components[i];
    }
    dec.reduced_risk = acc;
    dec.A = inactive_residual(p, spec, e.active);
    dec.total = dec.S * dec.reduced_risk + dec.A;
    return dec;
}

namespace {

/// Minimizes C_q over the finite subvector alpha (first coordinate pinned to
/// zero) with the multi-start policy: zeros, a descending ramp, then seeded
/// random starts.
struct InnerMin {
    double value{kInf};
    Vector alpha;
    bool converged{false};
    int solves{0};
    int failures{0};
};

InnerMin minimize_subvector(const ProbVector& q, const LossSpec& reduced,
                            const SolverOptions& opts, Rng& rng) {
    const int l = reduced.k;
    InnerMin best;
    best.alpha = Vector::Zero(l);

    const auto assemble = [l](const Eigen::VectorXd& x) {
        Vector alpha(l);
        alpha[0] = 0.0;
        for (int i = 1; i < l; ++i) alpha[i] = x[i - 1];
        return alpha;
    };
    const Objective objective = [&](const Eigen::VectorXd& x) {
        if (!x.allFinite()) return kInf;
        const Vector alpha = assemble(x);
        const double value = conditional_risk(q, reduced, alpha);
        return std::isnan(value) ? kInf : value;
    };
    const Gradient gradient = [&](const Eigen::VectorXd& x) {
        const Vector alpha = assemble(x);
        const Vector g = conditional_risk_gradient(q, reduced, alpha);
        return Eigen::VectorXd(g.tail(l - 1));
    };

    if (l == 1) {
        best.value = conditional_risk(q, reduced, Vector::Zero(1));
        best.converged = true;
        return best;
    }

    std::vector<Eigen::VectorXd> starts;
    starts.push_back(Eigen::VectorXd::Zero(l - 1));
    Eigen::VectorXd ramp(l - 1);
    for (int i = 0; i < l - 1; ++i) ramp[i] = -static_cast<double>(i + 1);
    starts.push_back(ramp);
    for (int s = 0; s < opts.random_starts; ++s) {
        Eigen::VectorXd x(l - 1);
        for (int i = 0; i < l - 1; ++i) x[i] = rng.uniform(-5.0, 0.0);
        starts.push_back(x);
    }

    MinimizeOptions mopts;
    mopts.max_iterations = opts.max_iterations;
    mopts.value_tol = opts.value_tol;
    for (const auto& x0 : starts) {
        const MinimizeResult r = minimize(objective, gradient, x0, mopts);
        ++best.solves;
        if (!r.converged) ++best.failures;
        if (r.value < best.value) {
            best.value = r.value;
            best.alpha = assemble(r.x);
            best.converged = r.converged;
        }
    }
    return best;
}

}  // namespace

BayesResult bayes_conditional_risk(const ProbVector& p, const LossSpec& spec,
                                   const SolverOptions& opts) {
    if (p.k() != spec.k) {
        throw std::invalid_argument("bayes_conditional_risk: dimension mismatch");
    }
    const std::vector<int> order = p.descending_order();
    Rng rng(opts.seed);

    BayesResult best;
    best.value = kInf;
    for (int l = 1; l <= spec.k; ++l) {
        const std::vector<int> active(order.begin(), order.begin() + l);
        const double residual = inactive_residual(p, spec, active);
        if (std::isinf(residual)) continue;  // cannot beat any finite candidate

        double mass = 0.0;
        Vector sub(l);
        for (int i = 0; i < l; ++i) {
            sub[i] = p[active[i]];
            mass += sub[i];
        }
        const ProbVector q(Vector(sub / mass));
        LossSpec reduced = spec;
        reduced.k = l;

        const InnerMin inner = minimize_subvector(q, reduced, opts, rng);
        best.local_solves += inner.solves;
        best.failed_solves += inner.failures;
        const double total = mass * inner.value + residual;
        if (total < best.value) {
            best.value = total;
            best.witness = ExtendedScore{spec.k, active, inner.alpha};
            best.converged = inner.converged;
        }
    }
    best.witness.canonicalize();
    return best;
}

namespace {

/// Constrained subproblem on an active set containing y: alpha_y = 0 and the
/// other active coordinates sit at -slack, slack = exp(theta) floored.
struct ConstrainedProblem {
    const ProbVector& q;
    const LossSpec& reduced;
    int y_pos;

    Vector assemble(const Eigen::VectorXd& theta) const {
        const int l = reduced.k;
        Vector alpha(l);
        int t = 0;
        for (int i = 0; i < l; ++i) {
            if (i == y_pos) {
                alpha[i] = 0.0;
            } else {
                alpha[i] = -std::max(std::exp(theta[t++]), kSlackFloor);
            }
        }
        return alpha;
    }

    double value(const Eigen::VectorXd& theta) const {
        if (!theta.allFinite()) return kInf;
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
            if (theta[i] > 700.0) return kInf;  // exp overflow guard
        }
        const double v = conditional_risk(q, reduced, assemble(theta));
        return std::isnan(v) ? kInf : v;
    }

    Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const {
        const int l = reduced.k;
        const Vector alpha = assemble(theta);
        const Vector g = conditional_risk_gradient(q, reduced, alpha);
        Eigen::VectorXd out(l - 1);
        int t = 0;
        for (int i = 0; i < l; ++i) {
            if (i == y_pos) continue;
            const double slack = std::exp(theta[t]);
            out[t] = slack > kSlackFloor ? -g[i] * slack : 0.0;
            ++t;
        }
        return out;
    }
};

}  // namespace

BayesResult constrained_bayes_risk(const ProbVector& p, const LossSpec& spec, int y,
                                   const SolverOptions& opts) {
    if (p.k() != spec.k) {
        throw std::invalid_argument("constrained_bayes_risk: dimension mismatch");
    }
    if (y < 0 || y >= spec.k) throw std::invalid_argument("constrained_bayes_risk: bad class");
    const std::vector<int> order = p.descending_order();
    Rng rng(opts.seed);

    BayesResult best;
    best.value = kInf;
    for (int l = 0; l <= spec.k; ++l) {
        if (l >= 1 && order[l - 1] == y) continue;  // same set as the previous prefix
        // Prefix of the descending sort, with y forced in.
        std::vector<int> active(order.begin(), order.begin() + l);
        if (std::find(active.begin(), active.end(), y) == active.end()) active.push_back(y);
        const int m = static_cast<int>(active.size());

        const double residual = inactive_residual(p, spec, active);
        if (std::isinf(residual)) continue;

        double mass = 0.0;
        Vector sub(m);
        int y_pos = 0;
        for (int i = 0; i < m; ++i) {
            sub[i] = p[active[i]];
            mass += sub[i];
            if (active[i] == y) y_pos = i;
        }
        LossSpec reduced = spec;
        reduced.k = m;
        const bool massless = mass <= 0.0;
        const ProbVector q(massless ? Vector(Vector::Constant(m, 1.0 / m))
                                    : Vector(sub / mass));

        // Exact all-ties configuration; interior optima are handled below.
        const double tie_value = conditional_risk(q, reduced, Vector::Zero(m));
        double inner_value = tie_value;
        Vector inner_alpha = Vector::Zero(m);
        bool inner_converged = true;

        if (m > 1 && !massless) {
            const ConstrainedProblem prob{q, reduced, y_pos};
            const Objective objective = [&](const Eigen::VectorXd& t) { return prob.value(t); };
            const Gradient gradient = [&](const Eigen::VectorXd& t) { return prob.gradient(t); };

            std::vector<Eigen::VectorXd> starts;
            starts.push_back(Eigen::VectorXd::Zero(m - 1));
            Eigen::VectorXd ramp(m - 1);
            for (int i = 0; i < m - 1; ++i) ramp[i] = std::log(1.0 + i);
            starts.push_back(ramp);
            for (int s = 0; s < opts.random_starts; ++s) {
                Eigen::VectorXd t(m - 1);
                for (int i = 0; i < m - 1; ++i) t[i] = rng.uniform(-3.0, 1.5);
                starts.push_back(t);
            }

            MinimizeOptions mopts;
            mopts.max_iterations = opts.max_iterations;
            mopts.value_tol = opts.value_tol;
            for (const auto& t0 : starts) {
                const MinimizeResult r = minimize(objective, gradient, t0, mopts);
                ++best.local_solves;
                if (!r.converged) ++best.failed_solves;
                if (r.value < inner_value) {
                    inner_value = r.value;
                    inner_alpha = prob.assemble(r.x);
                    inner_converged = r.converged;
                }
            }
        }

        const double total = (massless ? 0.0 : mass * inner_value) + residual;
        if (total < best.value) {
            best.value = total;
            best.witness = ExtendedScore{spec.k, active, inner_alpha};
            best.converged = inner_converged;
        }
    }
    return best;
}

Vector apply_permutation(const Eigen::Ref<const Vector>& v, const std::vector<int>& sigma) {
    const int k = static_cast<int>(v.size());
    if (static_cast<int>(sigma.size()) != k) {
        throw std::invalid_argument("apply_permutation: size mismatch");
    }
    std::vector<bool> seen(k, false);
    Vector out(k);
    for (int j = 0; j < k; ++j) {
        const int s = sigma[j];
        if (s < 0 || s >= k || seen[s]) {
            throw std::invalid_argument("apply_permutation: sigma is not a bijection");
        }
        seen[s] = true;
        out[j] = v[s];
    }
    return out;
}

ProbVector apply_permutation(const ProbVector& p, const std::vector<int>& sigma) {
    return ProbVector(apply_permutation(p.weights(), sigma));
}

std::vector<int> compose(const std::vector<int>& sigma, const std::vector<int>& tau) {
    if (sigma.size() != tau.size()) throw std::invalid_argument("compose: size mismatch");
    std::vector<int> out(sigma.size());
    for (std::size_t j = 0; j < sigma.size(); ++j) out[j] = tau[sigma[j]];
    return out;
}

}  // namespace gammaphi
