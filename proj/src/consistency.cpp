#include <gammaphi/consistency.hpp>

#include <gammaphi/counterexample.hpp>
#include <gammaphi/report.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace gammaphi {

namespace {

constexpr double kMassTolerance = 1e-12;

int argmax_lowest(const Vector& v) {
    int best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = static_cast<int>(i);
    }
    return best;
}

std::string format_csv(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

/// One backtracking gradient step; never increases the risk.
Vector descent_step(const ProbVector& p, const LossSpec& spec, const Vector& v, double& fv,
                    const DescentOptions& opts) {
    const Vector g = conditional_risk_gradient(p, spec, v);
    const double g2 = g.squaredNorm();
    if (!(g2 > 0.0) || !g.allFinite()) return v;
    double step = opts.init_step;
    while (step > 1e-16) {
        const Vector trial = v - step * g;
        const double ft = conditional_risk(p, spec, trial);
        if (std::isfinite(ft) && ft <= fv - opts.armijo * step * g2) {
            fv = ft;
            return trial;
        }
        step *= opts.shrink;
    }
    return v;
}

double population_01(const DiscreteDistribution& d, const std::vector<int>& argmaxes) {
    double risk = 0.0;
    for (std::size_t c = 0; c < d.cells.size(); ++c) {
        risk += d.cells[c].mass * (1.0 - d.cells[c].cond[argmaxes[c]]);
    }
    return risk;
}

bool violating_cell(const Cell& cell) {
    const Vector& q = cell.cond.weights();
    if (q.size() < 3) return false;
    const double r = q[0];
    if (!(r > 0.5 && r <= 2.0 / 3.0 + 1e-12)) return false;
    if (std::abs(q[1] - (1.0 - r)) > 1e-9) return false;
    for (Eigen::Index i = 2; i < q.size(); ++i) {
        if (q[i] > kMassTolerance) return false;
    }
    return true;
}

}  // namespace

DiscreteDistribution make_distribution(std::vector<Cell> cells) {
    if (cells.empty()) throw std::invalid_argument("distribution: no cells");
    const int k = cells.front().cond.k();
    double mass = 0.0;
    for (const Cell& cell : cells) {
        if (cell.cond.k() != k) throw std::invalid_argument("distribution: mixed dimensions");
        if (!(cell.mass >= 0.0) || !std::isfinite(cell.mass)) {
            throw std::invalid_argument("distribution: masses must be non-negative");
        }
        mass += cell.mass;
    }
    if (std::abs(mass - 1.0) > kMassTolerance) {
        throw std::invalid_argument("distribution: masses must sum to 1");
    }
    return DiscreteDistribution{k, std::move(cells)};
}

DiscreteDistribution parse_distribution(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("distribution: bad JSON: ") + e.what());
    }
    if (!j.contains("cells") || !j["cells"].is_array()) {
        throw std::invalid_argument("distribution: missing cells array");
    }
    std::vector<Cell> cells;
    for (const auto& cj : j["cells"]) {
        if (!cj.contains("mass") || !cj.contains("cond")) {
            throw std::invalid_argument("distribution: cell needs mass and cond");
        }
        Vector cond(cj["cond"].size());
        for (std::size_t i = 0; i < cj["cond"].size(); ++i) cond[static_cast<Eigen::Index>(i)] = cj["cond"][i].get<double>();
        cells.push_back(Cell{cj["mass"].get<double>(), ProbVector(std::move(cond))});
    }
    return make_distribution(std::move(cells));
}

std::string to_json(const DiscreteDistribution& d) {
    nlohmann::json j;
    j["cells"] = nlohmann::json::array();
    for (const Cell& cell : d.cells) {
        j["cells"].push_back(
            {{"mass", json_real(cell.mass)}, {"cond", json_vector(cell.cond.weights())}});
    }
    return dump_report(j);
}

double bayes_01_risk(const DiscreteDistribution& d) {
    double risk = 0.0;
    for (const Cell& cell : d.cells) {
        risk += cell.mass * (1.0 - cell.cond.weights().maxCoeff());
    }
    return risk;
}

Trajectory surrogate_descent(const DiscreteDistribution& d, const LossSpec& spec, int steps,
                             const DescentOptions& opts) {
    if (steps < 1) throw std::invalid_argument("surrogate_descent: steps must be >= 1");
    if (d.k != spec.k) throw std::invalid_argument("surrogate_descent: dimension mismatch");
    const std::size_t cells = d.cells.size();

    Trajectory traj;
    traj.bayes01 = bayes_01_risk(d);
    traj.surrogate_inf = 0.0;
    for (const Cell& cell : d.cells) {
        traj.surrogate_inf +=
            cell.mass * bayes_conditional_risk(cell.cond, spec, opts.solver).value;
    }

    std::vector<Vector> scores(cells, Vector::Zero(spec.k));
    std::vector<double> values(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        values[c] = conditional_risk(d.cells[c].cond, spec, scores[c]);
    }

    const auto record = [&](int step) {
        TrajectoryPoint pt;
        pt.step = step;
        pt.per_cell_argmax.resize(cells);
        for (std::size_t c = 0; c < cells; ++c) {
            pt.surrogate_risk += d.cells[c].mass * values[c];
            pt.per_cell_argmax[c] = argmax_lowest(scores[c]);
        }
        pt.zero_one_risk = population_01(d, pt.per_cell_argmax);
        traj.points.push_back(std::move(pt));
    };

    record(0);
    for (int step = 1; step <= steps; ++step) {
        for (std::size_t c = 0; c < cells; ++c) {
            scores[c] = descent_step(d.cells[c].cond, spec, scores[c], values[c], opts);
        }
        record(step);
    }
    return traj;
}

Trajectory adversarial_sequence(const DiscreteDistribution& d, const LossSpec& spec,
                                const std::vector<double>& t_grid, const DescentOptions& opts) {
    if (d.k != spec.k) throw std::invalid_argument("adversarial_sequence: dimension mismatch");
    if (spec.gamma.family != GammaFamily::CounterexamplePiecewise ||
        spec.phi.family != PhiFamily::Exp || spec.phi.scale != 1.0) {
        throw std::invalid_argument("adversarial_sequence: spec is not the counterexample loss");
    }
    if (t_grid.empty()) throw std::invalid_argument("adversarial_sequence: empty t grid");

    const std::size_t cells = d.cells.size();
    std::vector<bool> violating(cells, false);
    bool any = false;
    for (std::size_t c = 0; c < cells; ++c) {
        violating[c] = violating_cell(d.cells[c]);
        any = any || violating[c];
    }
    if (!any) {
        throw std::invalid_argument(
            "adversarial_sequence: no cell with cond = (r, 1-r, 0, ..., 0), r in (1/2, 2/3]");
    }

    Trajectory traj;
    traj.bayes01 = bayes_01_risk(d);
    traj.surrogate_inf = 0.0;
    for (const Cell& cell : d.cells) {
        traj.surrogate_inf +=
            cell.mass * bayes_conditional_risk(cell.cond, spec, opts.solver).value;
    }

    // Non-violating cells sit at their descent limit throughout.
    std::vector<Vector> fixed(cells, Vector::Zero(spec.k));
    for (std::size_t c = 0; c < cells; ++c) {
        if (violating[c]) continue;
        double value = conditional_risk(d.cells[c].cond, spec, fixed[c]);
        for (int step = 0; step < 500; ++step) {
            fixed[c] = descent_step(d.cells[c].cond, spec, fixed[c], value, opts);
        }
    }

    for (const double t : t_grid) {
        TrajectoryPoint pt;
        pt.step = t;
        pt.per_cell_argmax.resize(cells);
        for (std::size_t c = 0; c < cells; ++c) {
            const Vector v = violating[c] ? divergent_witness(spec.k, t) : fixed[c];
            pt.surrogate_risk += d.cells[c].mass * conditional_risk(d.cells[c].cond, spec, v);
            pt.per_cell_argmax[c] = argmax_lowest(v);
        }
        pt.zero_one_risk = population_01(d, pt.per_cell_argmax);
        traj.points.push_back(std::move(pt));
    }
    return traj;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory) {
    os << "step,surrogate_risk,zero_one_risk\n";
    for (const TrajectoryPoint& pt : trajectory.points) {
        os << format_csv(pt.step) << ',' << format_csv(pt.surrogate_risk) << ','
           << format_csv(pt.zero_one_risk) << '\n';
    }
}

}  // namespace gammaphi
