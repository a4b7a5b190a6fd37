#include <gammaphi/counterexample.hpp>

#include <gammaphi/report.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace gammaphi {

namespace {

const GammaSpec kCexGamma{GammaFamily::CounterexamplePiecewise, 1.0};

void require_r(double r) {
    if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("r must lie in (0, 1)");
}

std::string format_csv(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

}  // namespace

double f_profile(double r, double x) {
    require_r(r);
    return r * gamma_eval(kCexGamma, std::exp(-x)) +
           (1.0 - r) * gamma_eval(kCexGamma, std::exp(x));
}

double g_plus(double r, double x) {
    const double em = std::exp(-x);
    const double ep = std::exp(x);
    return 2.0 * r * (em - 1.0) * em + 4.0 * (1.0 - r) * (ep - 1.0) * ep;
}

double g_minus(double r, double x) {
    const double em = std::exp(-x);
    const double ep = std::exp(x);
    return -4.0 * r * (em - 1.0) * em - 2.0 * (1.0 - r) * (ep - 1.0) * ep;
}

double f_derivative(double r, double x) {
    require_r(r);
    if (x > 0.0) return g_plus(r, x);
    if (x < 0.0) return g_minus(r, x);
    return 0.0;
}

std::optional<double> g_zero(double r, GSide side) {
    require_r(r);
    // A root at 0 itself is excluded; the epsilon absorbs rounding of the
    // logarithm at the boundary values r = 2/3 and r = 1/3.
    constexpr double kBoundary = 1e-14;
    if (side == GSide::Plus) {
        const double z = std::log(r / (2.0 * (1.0 - r))) / 3.0;
        if (z > kBoundary) return z;  // exists iff r > 2/3
        return std::nullopt;
    }
    const double z = std::log(2.0 * r / (1.0 - r)) / 3.0;
    if (z < -kBoundary) return z;  // exists iff r < 1/3
    return std::nullopt;
}

Vector divergent_witness(int k, double t) {
    if (k < 2) throw std::invalid_argument("divergent_witness: k must be >= 2");
    if (!(t > 0.0)) throw std::invalid_argument("divergent_witness: t must be positive");
    Vector w = Vector::Constant(k, -t);
    w[0] = 0.0;
    w[1] = 1.0 / t;
    return w;
}

CexReport verify_counterexample(const CexParams& params, double tol, const SolverOptions& solver) {
    require_r(params.r);
    if (params.k < 2) throw std::invalid_argument("verify_counterexample: k must be >= 2");
    if (params.t_grid.empty()) throw std::invalid_argument("verify_counterexample: empty t grid");
    for (std::size_t i = 0; i < params.t_grid.size(); ++i) {
        if (!(params.t_grid[i] > 0.0) ||
            (i > 0 && !(params.t_grid[i] > params.t_grid[i - 1]))) {
            throw std::invalid_argument("verify_counterexample: t grid must be increasing");
        }
    }

    CexReport report;
    report.params = params;
    report.spec = loss_preset("cex", params.k);
    report.tol = tol;
    report.solver_seed = solver.seed;

    Vector w = Vector::Zero(params.k);
    w[0] = params.r;
    w[1] = 1.0 - params.r;
    const ProbVector p(std::move(w));

    for (const double t : params.t_grid) {
        report.risk_curve.emplace_back(t, conditional_risk(p, report.spec, divergent_witness(params.k, t)));
    }
    report.bayes = bayes_conditional_risk(p, report.spec, solver).value;

    const bool r_ok = params.r > 0.5 && params.r <= 2.0 / 3.0 + 1e-12;
    report.checks.push_back(
        {"r_in_range", r_ok,
         r_ok ? "r lies in (1/2, 2/3]" : "r outside (1/2, 2/3]; the construction needs p descending with p1 > p2 and the F landscape of that range"});

    const bool k_ok = params.k >= 3;
    report.checks.push_back(
        {"k_at_least_3", k_ok,
         k_ok ? "a zero-mass class is available to drive to -inf"
              : "k = 2 leaves no zero-mass class; the divergent-tail mechanism that separates "
                "the witness from every finite minimizer is unavailable"});

    bool argmax_ok = true;
    for (const double t : params.t_grid) {
        const Vector wt = divergent_witness(params.k, t);
        int am = 0;
        wt.maxCoeff(&am);
        if (am != 1) argmax_ok = false;
    }
    int pm = 0;
    p.weights().maxCoeff(&pm);
    argmax_ok = argmax_ok && pm == 0;
    report.checks.push_back({"witness_argmax", argmax_ok,
                             "argmax w^t = 2 for every t while argmax p = 1"});

    bool decreasing = true;
    double final_gap = 0.0;
    for (std::size_t i = 0; i < report.risk_curve.size(); ++i) {
        const double gap = std::abs(report.risk_curve[i].second - report.bayes);
        if (i > 0) {
            const double prev = std::abs(report.risk_curve[i - 1].second - report.bayes);
            if (gap > prev + 1e-12) decreasing = false;
        }
        final_gap = gap;
    }
    std::ostringstream conv;
    conv << "final gap " << final_gap << " at t = " << params.t_grid.back();
    report.checks.push_back({"gap_decreasing", decreasing, "gap |C_p(w^t) - C_p*| monotone in t"});
    report.checks.push_back({"gap_below_tol", final_gap < tol, conv.str()});

    // 1-D landscape: F must take its unique grid minimum at x = 0.
    bool f_min_ok = true;
    const double f0 = f_profile(params.r, 0.0);
    const int pts = 2001;
    for (int i = 0; i < pts; ++i) {
        const double x = -5.0 + 10.0 * static_cast<double>(i) / (pts - 1);
        if (x == 0.0) continue;
        if (!(f_profile(params.r, x) > f0)) f_min_ok = false;
    }
    report.checks.push_back({"f_unique_minimum", f_min_ok,
                             f_min_ok ? "F(x) > F(0) on the grid" : "F is not minimized at 0"});

    report.pass = true;
    for (const CexCheck& c : report.checks) report.pass = report.pass && c.pass;
    if (!k_ok) {
        report.note =
            "not a qualifying counterexample configuration: the calibration failure requires "
            "k >= 3 so that p = (r, 1-r, 0, ..., 0) has a zero-mass class; see the report checks";
    } else if (!report.pass) {
        report.note = "one or more verification checks failed; see the report checks";
    }
    return report;
}

std::string to_json(const CexReport& report) {
    nlohmann::json j;
    j["schema_version"] = kReportSchemaVersion;
    j["artifact_version"] = kArtifactVersion;
    j["kind"] = "counterexample_report";
    nlohmann::json grid = nlohmann::json::array();
    for (const double t : report.params.t_grid) grid.push_back(json_real(t));
    j["config"] = {
        {"r", json_real(report.params.r)},
        {"k", report.params.k},
        {"t_grid", grid},
        {"tol", json_real(report.tol)},
        {"solver_seed", report.solver_seed},
        {"loss", loss_config_string(report.spec)},
    };
    j["bayes"] = json_real(report.bayes);
    j["risk_curve"] = nlohmann::json::array();
    for (const auto& [t, risk] : report.risk_curve) {
        j["risk_curve"].push_back({{"t", json_real(t)}, {"risk", json_real(risk)}});
    }
    j["checks"] = nlohmann::json::array();
    for (const CexCheck& c : report.checks) {
        j["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    }
    j["pass"] = report.pass;
    j["note"] = report.note;
    return dump_report(j);
}

void write_risk_csv(std::ostream& os, const CexReport& report) {
    os << "t,risk\n";
    for (const auto& [t, risk] : report.risk_curve) {
        os << format_csv(t) << ',' << format_csv(risk) << '\n';
    }
}

void write_profile_csv(std::ostream& os, double r, double lo, double hi, int points) {
    require_r(r);
    if (points < 2 || !(hi > lo)) throw std::invalid_argument("profile csv: degenerate grid");
    os << "x,F,Fprime\n";
    for (int i = 0; i < points; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
        os << format_csv(x) << ',' << format_csv(f_profile(r, x)) << ','
           << format_csv(f_derivative(r, x)) << '\n';
    }
}

}  // namespace gammaphi
