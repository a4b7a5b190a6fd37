#pragma once

#include <gammaphi/risk.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace gammaphi {

/// Finite instance space: cells with mass and class-conditional distribution.
struct Cell {
    double mass{0.0};
    ProbVector cond;
};

struct DiscreteDistribution {
    int k{0};
    std::vector<Cell> cells;
};

/// Validates masses (non-negative, sum 1 within 1e-12) and dimensions.
DiscreteDistribution make_distribution(std::vector<Cell> cells);

/// JSON document {"cells": [{"mass": m, "cond": [...]}, ...]}.
DiscreteDistribution parse_distribution(const std::string& json_text);
std::string to_json(const DiscreteDistribution& d);

/// sum over cells of mass * (1 - max cond).
double bayes_01_risk(const DiscreteDistribution& d);

struct TrajectoryPoint {
    double step{0.0};  // iteration index, or t for the adversarial sequence
    double surrogate_risk{0.0};
    double zero_one_risk{0.0};
    std::vector<int> per_cell_argmax;
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;
    double bayes01{0.0};
    double surrogate_inf{0.0};  // population infimum of the surrogate risk
};

struct DescentOptions {
    double init_step{1.0};
    double shrink{0.5};
    double armijo{1e-4};
    SolverOptions solver;  // used for the surrogate-infimum reference values
};

/// Per-cell gradient descent on the conditional risk from zero scores with
/// backtracking line search; population surrogate risk is non-increasing.
/// Argmax ties break toward the lowest index.
Trajectory surrogate_descent(const DiscreteDistribution& d, const LossSpec& spec, int steps,
                             const DescentOptions& opts = {});

/// Surrogate-optimal but 01-suboptimal trajectory for the piecewise
/// counterexample loss: violating cells (cond = (r, 1-r, 0, ..., 0) with
/// r in (1/2, 2/3]) follow the divergent witness over t_grid, other cells sit
/// at their descent limit. Throws std::invalid_argument when spec is not the
/// counterexample loss or no violating cell exists.
Trajectory adversarial_sequence(const DiscreteDistribution& d, const LossSpec& spec,
                                const std::vector<double>& t_grid,
                                const DescentOptions& opts = {});

/// Columns: step, surrogate_risk, zero_one_risk.
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory);

}  // namespace gammaphi
