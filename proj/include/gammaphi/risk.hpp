#pragma once

#include <gammaphi/loss.hpp>

#include <cstdint>
#include <vector>

namespace gammaphi {

/// Point of the probability simplex, boundary included. Entries are
/// non-negative and sum to one within 1e-12.
class ProbVector {
public:
    explicit ProbVector(Vector w);
    static ProbVector uniform(int k);

    const Vector& weights() const { return w_; }
    int k() const { return static_cast<int>(w_.size()); }
    double operator[](int i) const { return w_[i]; }

    bool on_boundary(double tol = 0.0) const;
    /// Indices ordered by descending weight (stable).
    std::vector<int> descending_order() const;
    ProbVector descending() const;

private:
    Vector w_;
};

/// Score configuration with a finite subvector on an active index set and all
/// remaining coordinates at -inf. Inactive coordinates are understood to
/// diverge at a common rate.
struct ExtendedScore {
    int k{0};
    std::vector<int> active;  // ordered, distinct, subset of [0, k)
    Vector alpha;             // finite, same length as active

    int active_count() const { return static_cast<int>(active.size()); }
    /// Shift alpha so max(alpha) = 0.
    void canonicalize();
    /// Finite proxy: active coordinates at alpha, inactive at -depth.
    Vector realize(double depth) const;
};

/// The limit risk of an ExtendedScore split as S * C_q(alpha) + A.
struct RiskDecomposition {
    double S{0.0};            // probability mass of the active classes
    Vector q;                 // conditional weights on the active classes
    double reduced_risk{0.0}; // C_q(alpha)
    double A{0.0};            // residual from inactive classes; may be +inf
    double total{0.0};        // S * reduced_risk + A; may be +inf
};

double conditional_risk(const ProbVector& p, const LossSpec& spec,
                        const Eigen::Ref<const Vector>& v);

/// Gradient of the conditional risk in v; components sum to zero.
Vector conditional_risk_gradient(const ProbVector& p, const LossSpec& spec,
                                 const Eigen::Ref<const Vector>& v);

/// Exact limit risk of a sequence whose inactive coordinates go to -inf
/// together. +inf is a legal total and is returned explicitly.
RiskDecomposition extended_risk(const ProbVector& p, const LossSpec& spec,
                                const ExtendedScore& e);

struct SolverOptions {
    std::uint64_t seed{0};
    int max_iterations{5000};
    double value_tol{1e-10};
    int random_starts{3};
};

struct BayesResult {
    double value{0.0};
    ExtendedScore witness;
    bool converged{false};
    int local_solves{0};
    int failed_solves{0};
};

/// Conditional Bayes risk: infimum of the conditional risk over all score
/// configurations. Searches every prefix of the descending sort of p as the
/// active set and minimizes the finite subvector with a seeded multi-start.
BayesResult bayes_conditional_risk(const ProbVector& p, const LossSpec& spec,
                                   const SolverOptions& opts = {});

/// Same infimum restricted to configurations where class y is active and
/// alpha_y = max(alpha). Non-y active coordinates are parameterized as
/// y's level minus a non-negative slack optimized in log-space.
BayesResult constrained_bayes_risk(const ProbVector& p, const LossSpec& spec, int y,
                                   const SolverOptions& opts = {});

/// sigma must be a bijection on {0, ..., k-1}; output j = input sigma(j).
Vector apply_permutation(const Eigen::Ref<const Vector>& v, const std::vector<int>& sigma);
ProbVector apply_permutation(const ProbVector& p, const std::vector<int>& sigma);

/// Product permutation satisfying
/// apply_permutation(apply_permutation(v, tau), sigma) == apply_permutation(v, compose(sigma, tau)).
std::vector<int> compose(const std::vector<int>& sigma, const std::vector<int>& tau);

}  // namespace gammaphi
