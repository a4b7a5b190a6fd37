#pragma once

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

namespace gammaphi {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Outer link functions gamma : [0, inf) -> [0, inf), non-decreasing.
enum class GammaFamily {
    Log1p,                    // gamma(x) = log(1 + x)
    ScaledLog1p,              // gamma(x) = T log(1 + x), T > 0
    Identity,                 // gamma(x) = x
    SquaredRatio,             // gamma(x) = (x / (1 + x))^2, bounded by 1
    CounterexamplePiecewise,  // 1 - (x-1)^2 for x < 1, 2(x-1)^2 + 1 for x >= 1
};

/// Inner transfer functions phi : R -> [0, inf), non-increasing with inf phi = 0.
enum class PhiFamily {
    Exp,              // phi(x) = exp(-scale x), scale > 0
    ShiftedScaledExp, // phi(x) = exp((shift - x) / T), T > 0
    Sigmoid,          // phi(x) = 1 / (1 + exp(scale x)), scale > 0
};

struct GammaSpec {
    GammaFamily family{GammaFamily::Log1p};
    double temperature{1.0};  // ScaledLog1p only
};

struct PhiSpec {
    PhiFamily family{PhiFamily::Exp};
    double scale{1.0};        // Exp, Sigmoid
    double shift{1.0};        // ShiftedScaledExp
    double temperature{1.0};  // ShiftedScaledExp
};

/// A concrete k-class loss: component y is gamma(sum_{j != y} phi(v_y - v_j)).
struct LossSpec {
    GammaSpec gamma;
    PhiSpec phi;
    int k{2};
    std::string name;  // preset name when constructed from one, informational
};

double gamma_eval(const GammaSpec& spec, double x);
double gamma_deriv(const GammaSpec& spec, double x);
double phi_eval(const PhiSpec& spec, double x);
double phi_deriv(const PhiSpec& spec, double x);

/// sup of gamma over [0, inf); +inf for the unbounded families.
double gamma_sup(const GammaSpec& spec);
/// Limit of phi as x -> -inf (its supremum); +inf for the exponential families.
double phi_sup(const PhiSpec& spec);

/// gamma extended to [0, +inf]: gamma_eval on finite x, gamma_sup at x = +inf.
double gamma_eval_extended(const GammaSpec& spec, double x);

/// All k loss components at a finite score vector. phi overflow saturates to
/// +inf and propagates through gamma as gamma's supremum.
Vector loss_components(const LossSpec& spec, const Eigen::Ref<const Vector>& v);

/// Entry (y, j) is dL_y / dv_j. Rows sum to zero.
Matrix loss_jacobian(const LossSpec& spec, const Eigen::Ref<const Vector>& v);

/// Evaluation grid for the condition checkers.
struct GridPlan {
    double lo{0.0};
    double hi{100.0};
    int points{1001};
};

inline GridPlan default_gamma_grid() { return GridPlan{0.0, 100.0, 1001}; }
inline GridPlan default_phi_grid() { return GridPlan{-50.0, 50.0, 1001}; }

struct ConditionEvidence {
    std::string check;  // which verdict this point supports
    double x{};
    double value{};
};

/// Verdicts for the sufficient-condition checks on gamma and phi, with the
/// grid points that back them up.
struct ConditionReport {
    bool gamma_si{false};            // strictly increasing
    bool gamma_pd{false};            // derivative > 0 everywhere on the grid
    bool gamma_sup_infinite{false};  // sup gamma = +inf (analytic per family)
    bool phi_ndz{false};             // phi' <= 0 everywhere, phi'(0) < 0
    bool phi_inf_zero{false};        // inf phi = 0
    std::vector<ConditionEvidence> evidence;

    /// Hypotheses under which calibration is guaranteed for the induced loss.
    bool sufficient_for_calibration() const {
        return gamma_pd && gamma_sup_infinite && phi_ndz && phi_inf_zero;
    }
};

// Derivative positivity tolerance for the grid checks.
inline constexpr double kDerivativeTolerance = 1e-9;

ConditionReport check_gamma_conditions(const GammaSpec& spec,
                                       const GridPlan& grid = default_gamma_grid());
ConditionReport check_phi_conditions(const PhiSpec& spec,
                                     const GridPlan& grid = default_phi_grid());

/// Function-level phi checker so tests can probe arbitrary candidates.
ConditionReport check_phi_conditions_fn(const std::function<double(double)>& phi,
                                        const std::function<double(double)>& dphi,
                                        bool analytic_inf_zero, const GridPlan& grid);

/// Runs both checkers and merges the fragments.
ConditionReport check_conditions(const LossSpec& spec,
                                 const GridPlan& gamma_grid = default_gamma_grid(),
                                 const GridPlan& phi_grid = default_phi_grid());

/// Named presets: logistic, coherence[:T], pairwise-exp, savage[:scale],
/// sigmoid, cex. Throws std::invalid_argument for unknown names.
LossSpec loss_preset(const std::string& name, int k);

/// key=value config text (gamma.family, gamma.T, phi.family, phi.scale,
/// phi.shift, phi.T, k). Blank lines and '#' comments ignored.
LossSpec parse_loss_config(const std::string& text);

/// Round-trippable config text for a spec; embedded in reports.
std::string loss_config_string(const LossSpec& spec);

std::string gamma_family_name(GammaFamily f);
std::string phi_family_name(PhiFamily f);

}  // namespace gammaphi
