#pragma once

#include <gammaphi/risk.hpp>

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace gammaphi {

/// Binary risk profile of the piecewise loss along the score difference x:
/// F(x) = r gamma(phi(x)) + (1-r) gamma(phi(-x)) with phi(x) = exp(-x).
double f_profile(double r, double x);

/// Piecewise-exact derivative of F: G+(x) on x > 0, G-(x) on x < 0, 0 at 0.
double f_derivative(double r, double x);

double g_plus(double r, double x);
double g_minus(double r, double x);

enum class GSide { Plus, Minus };

/// Closed-form nonzero root of G+/G- when it lies on the required side:
/// plus side ln(r / (2(1-r))) / 3 when r > 2/3, minus side ln(2r / (1-r)) / 3
/// when r < 1/3; empty otherwise.
std::optional<double> g_zero(double r, GSide side);

/// The witness sequence (0, 1/t, -t, ..., -t); argmax is class 2 for t > 0.
Vector divergent_witness(int k, double t);

struct CexParams {
    double r{0.6};  // meaningful range (1/2, 2/3]
    int k{3};       // the violation needs k >= 3 (a zero-mass class)
    std::vector<double> t_grid{1, 2, 5, 10, 50, 100, 500, 1000};
};

struct CexCheck {
    std::string name;
    bool pass{false};
    std::string detail;
};

struct CexReport {
    CexParams params;
    LossSpec spec;
    double tol{1e-2};
    std::uint64_t solver_seed{0};
    double bayes{0.0};
    std::vector<std::pair<double, double>> risk_curve;  // (t, C_p(w^t))
    std::vector<CexCheck> checks;
    bool pass{false};
    std::string note;
};

/// Reproduces the calibration failure: evaluates the risk of the divergent
/// witness over t_grid against the conditional Bayes risk of
/// p = (r, 1-r, 0, ..., 0), and verifies the gap convergence, the argmax
/// mismatch, the F landscape, and the structural requirements on (r, k).
CexReport verify_counterexample(const CexParams& params, double tol = 1e-2,
                                const SolverOptions& solver = {});

std::string to_json(const CexReport& report);

/// (t, risk) rows of the convergence curve.
void write_risk_csv(std::ostream& os, const CexReport& report);

/// (x, F, Fprime) rows on a uniform grid.
void write_profile_csv(std::ostream& os, double r, double lo = -5.0, double hi = 5.0,
                       int points = 2001);

}  // namespace gammaphi
