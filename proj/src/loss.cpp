#include <gammaphi/loss.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace gammaphi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_gamma_params(const GammaSpec& spec) {
    if (spec.family == GammaFamily::ScaledLog1p && !(spec.temperature > 0.0)) {
        throw std::invalid_argument("gamma: temperature must be positive");
    }
}

void require_phi_params(const PhiSpec& spec) {
    switch (spec.family) {
    case PhiFamily::Exp:
        if (!(spec.scale > 0.0)) throw std::invalid_argument("phi: scale must be positive");
        break;
    case PhiFamily::ShiftedScaledExp:
        if (!(spec.temperature > 0.0)) {
            throw std::invalid_argument("phi: temperature must be positive");
        }
        break;
    case PhiFamily::Sigmoid:
        if (!(spec.scale > 0.0)) throw std::invalid_argument("phi: scale must be positive");
        break;
    }
}

}  // namespace

double gamma_eval(const GammaSpec& spec, double x) {
    require_gamma_params(spec);
    if (!(x >= 0.0)) throw std::domain_error("gamma: argument must be non-negative");
    switch (spec.family) {
    case GammaFamily::Log1p:
        return std::log1p(x);
    case GammaFamily::ScaledLog1p:
        return spec.temperature * std::log1p(x);
    case GammaFamily::Identity:
        return x;
    case GammaFamily::SquaredRatio: {
        const double r = x / (1.0 + x);
        return r * r;
    }
    case GammaFamily::CounterexamplePiecewise:
        if (x < 1.0) return 1.0 - (x - 1.0) * (x - 1.0);
        return 2.0 * (x - 1.0) * (x - 1.0) + 1.0;
    }
    throw std::logic_error("gamma: unknown family");
}

double gamma_deriv(const GammaSpec& spec, double x) {
    require_gamma_params(spec);
    if (!(x >= 0.0)) throw std::domain_error("gamma: argument must be non-negative");
    switch (spec.family) {
    case GammaFamily::Log1p:
        return 1.0 / (1.0 + x);
    case GammaFamily::ScaledLog1p:
        return spec.temperature / (1.0 + x);
    case GammaFamily::Identity:
        return 1.0;
    case GammaFamily::SquaredRatio: {
        const double d = 1.0 + x;
        return 2.0 * x / (d * d * d);
    }
    case GammaFamily::CounterexamplePiecewise:
        // Continuous at the branch point: both pieces vanish at x = 1.
        if (x < 1.0) return -2.0 * (x - 1.0);
        return 4.0 * (x - 1.0);
    }
    throw std::logic_error("gamma: unknown family");
}

double gamma_sup(const GammaSpec& spec) {
    require_gamma_params(spec);
    return spec.family == GammaFamily::SquaredRatio ? 1.0 : kInf;
}

double gamma_eval_extended(const GammaSpec& spec, double x) {
    if (std::isinf(x) && x > 0.0) return gamma_sup(spec);
    return gamma_eval(spec, x);
}

double phi_eval(const PhiSpec& spec, double x) {
    require_phi_params(spec);
    switch (spec.family) {
    case PhiFamily::Exp:
        return std::exp(-spec.scale * x);
    case PhiFamily::ShiftedScaledExp:
        return std::exp((spec.shift - x) / spec.temperature);
    case PhiFamily::Sigmoid:
        return 1.0 / (1.0 + std::exp(spec.scale * x));
    }
    throw std::logic_error("phi: unknown family");
}

double phi_deriv(const PhiSpec& spec, double x) {
    require_phi_params(spec);
    switch (spec.family) {
    case PhiFamily::Exp:
        return -spec.scale * std::exp(-spec.scale * x);
    case PhiFamily::ShiftedScaledExp:
        return -std::exp((spec.shift - x) / spec.temperature) / spec.temperature;
    case PhiFamily::Sigmoid: {
        // -scale e^{sx} / (1 + e^{sx})^2, evaluated via the stable sigmoid.
        const double s = 1.0 / (1.0 + std::exp(spec.scale * x));
        return -spec.scale * s * (1.0 - s);
    }
    }
    throw std::logic_error("phi: unknown family");
}

double phi_sup(const PhiSpec& spec) {
    require_phi_params(spec);
    return spec.family == PhiFamily::Sigmoid ? 1.0 : kInf;
}

Vector loss_components(const LossSpec& spec, const Eigen::Ref<const Vector>& v) {
    if (v.size() != spec.k) throw std::invalid_argument("loss_components: dimension mismatch");
    if (!v.allFinite()) {
        throw std::domain_error("loss_components: scores must be finite");
    }
    const int k = spec.k;
    Vector out(k);
    for (int y = 0; y < k; ++y) {
        double acc = 0.0;
        for (int j = 0; j < k; ++j) {
            if (j == y) continue;
            acc += phi_eval(spec.phi, v[y] - v[j]);
        }
        out[y] = gamma_eval_extended(spec.gamma, acc);
    }
    return out;
}

Matrix loss_jacobian(const LossSpec& spec, const Eigen::Ref<const Vector>& v) {
    if (v.size() != spec.k) throw std::invalid_argument("loss_jacobian: dimension mismatch");
    if (!v.allFinite()) throw std::domain_error("loss_jacobian: scores must be finite");
    const int k = spec.k;
    Matrix jac = Matrix::Zero(k, k);
    for (int y = 0; y < k; ++y) {
        double acc = 0.0;
        double dsum = 0.0;
        for (int j = 0; j < k; ++j) {
            if (j == y) continue;
            acc += phi_eval(spec.phi, v[y] - v[j]);
            dsum += phi_deriv(spec.phi, v[y] - v[j]);
        }
        const double g = gamma_deriv(spec.gamma, acc);
        jac(y, y) = g * dsum;
        for (int j = 0; j < k; ++j) {
            if (j == y) continue;
            jac(y, j) = -g * phi_deriv(spec.phi, v[y] - v[j]);
        }
    }
    return jac;
}

namespace {

void require_grid(const GridPlan& grid) {
    if (grid.points < 2 || !(grid.hi > grid.lo)) {
        throw std::invalid_argument("condition check: degenerate grid");
    }
}

double grid_point(const GridPlan& grid, int i) {
    return grid.lo + (grid.hi - grid.lo) * static_cast<double>(i) /
                         static_cast<double>(grid.points - 1);
}

}  // namespace

ConditionReport check_gamma_conditions(const GammaSpec& spec, const GridPlan& grid) {
    require_grid(grid);
    if (grid.lo != 0.0 || grid.hi < 100.0) {
        throw std::invalid_argument("gamma conditions: grid must cover [0, x_max], x_max >= 100");
    }
    require_gamma_params(spec);

    ConditionReport rep;
    bool si = true;
    double worst_increase = kInf;
    double worst_increase_x = 0.0;
    bool pd = true;
    double min_deriv = kInf;
    double min_deriv_x = 0.0;
    double prev = gamma_eval(spec, grid_point(grid, 0));
    for (int i = 0; i < grid.points; ++i) {
        const double x = grid_point(grid, i);
        const double d = gamma_deriv(spec, x);
        if (d < min_deriv) {
            min_deriv = d;
            min_deriv_x = x;
        }
        if (!(d > kDerivativeTolerance)) pd = false;
        if (i > 0) {
            const double cur = gamma_eval(spec, x);
            const double inc = cur - prev;
            if (inc < worst_increase) {
                worst_increase = inc;
                worst_increase_x = x;
            }
            if (!(inc > 0.0)) si = false;
            prev = cur;
        }
    }
    rep.gamma_si = si;
    rep.gamma_pd = pd;
    // Unboundedness is an analytic fact per family; the grid only witnesses
    // continued growth (or the plateau, for the bounded family).
    rep.gamma_sup_infinite = std::isinf(gamma_sup(spec));
    rep.evidence.push_back({"gamma_si", worst_increase_x, worst_increase});
    rep.evidence.push_back({"gamma_pd", min_deriv_x, min_deriv});
    rep.evidence.push_back({"gamma_sup", grid.hi, gamma_eval(spec, grid.hi)});
    rep.evidence.push_back({"gamma_sup", grid.hi / 2.0, gamma_eval(spec, grid.hi / 2.0)});
    return rep;
}

ConditionReport check_phi_conditions_fn(const std::function<double(double)>& phi,
                                        const std::function<double(double)>& dphi,
                                        bool analytic_inf_zero, const GridPlan& grid) {
    require_grid(grid);
    if (std::abs(grid.lo + grid.hi) > 1e-9) {
        throw std::invalid_argument("phi conditions: grid must be symmetric around 0");
    }

    ConditionReport rep;
    bool nonpositive = true;
    double max_deriv = -kInf;
    double max_deriv_x = 0.0;
    for (int i = 0; i < grid.points; ++i) {
        const double x = grid_point(grid, i);
        const double d = dphi(x);
        if (d > max_deriv) {
            max_deriv = d;
            max_deriv_x = x;
        }
        if (d > 0.0) nonpositive = false;
    }
    const double at_zero = dphi(0.0);
    rep.phi_ndz = nonpositive && at_zero < -kDerivativeTolerance;
    const double tail = phi(grid.hi);
    rep.phi_inf_zero = analytic_inf_zero && tail < 1e-6;
    rep.evidence.push_back({"phi_ndz", 0.0, at_zero});
    rep.evidence.push_back({"phi_ndz", max_deriv_x, max_deriv});
    rep.evidence.push_back({"phi_inf", grid.hi, tail});
    return rep;
}

ConditionReport check_phi_conditions(const PhiSpec& spec, const GridPlan& grid) {
    require_phi_params(spec);
    // inf phi = 0 holds analytically for every shipped family.
    return check_phi_conditions_fn([&](double x) { return phi_eval(spec, x); },
                                   [&](double x) { return phi_deriv(spec, x); },
                                   /*analytic_inf_zero=*/true, grid);
}

ConditionReport check_conditions(const LossSpec& spec, const GridPlan& gamma_grid,
                                 const GridPlan& phi_grid) {
    ConditionReport rep = check_gamma_conditions(spec.gamma, gamma_grid);
    ConditionReport phi = check_phi_conditions(spec.phi, phi_grid);
    rep.phi_ndz = phi.phi_ndz;
    rep.phi_inf_zero = phi.phi_inf_zero;
    rep.evidence.insert(rep.evidence.end(), phi.evidence.begin(), phi.evidence.end());
    return rep;
}

namespace {

const std::map<std::string, GammaFamily> kGammaNames = {
    {"log1p", GammaFamily::Log1p},
    {"scaled_log1p", GammaFamily::ScaledLog1p},
    {"identity", GammaFamily::Identity},
    {"squared_ratio", GammaFamily::SquaredRatio},
    {"counterexample_piecewise", GammaFamily::CounterexamplePiecewise},
};

const std::map<std::string, PhiFamily> kPhiNames = {
    {"exp", PhiFamily::Exp},
    {"shifted_scaled_exp", PhiFamily::ShiftedScaledExp},
    {"sigmoid", PhiFamily::Sigmoid},
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_positive(const std::string& text, const char* what) {
    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string(what) + ": not a number: " + text);
    }
    if (pos != text.size() || !(value > 0.0)) {
        throw std::invalid_argument(std::string(what) + ": must be a positive number: " + text);
    }
    return value;
}

}  // namespace

LossSpec loss_preset(const std::string& name, int k) {
    if (k < 2) throw std::invalid_argument("loss preset: k must be >= 2");
    std::string base = name;
    std::string param;
    if (const auto colon = name.find(':'); colon != std::string::npos) {
        base = name.substr(0, colon);
        param = name.substr(colon + 1);
    }

    LossSpec spec;
    spec.k = k;
    spec.name = name;
    if (base == "logistic") {
        spec.gamma.family = GammaFamily::Log1p;
        spec.phi.family = PhiFamily::Exp;
    } else if (base == "coherence") {
        const double T = param.empty() ? 1.0 : parse_positive(param, "coherence T");
        spec.gamma = {GammaFamily::ScaledLog1p, T};
        spec.phi.family = PhiFamily::ShiftedScaledExp;
        spec.phi.shift = 1.0;
        spec.phi.temperature = T;
    } else if (base == "pairwise-exp") {
        spec.gamma.family = GammaFamily::Identity;
        spec.phi.family = PhiFamily::Exp;
    } else if (base == "savage") {
        // savage pairs (x/(1+x))^2 with exp(-x); savage:2 uses exp(-2x).
        spec.gamma.family = GammaFamily::SquaredRatio;
        spec.phi.family = PhiFamily::Exp;
        spec.phi.scale = param.empty() ? 1.0 : parse_positive(param, "savage scale");
    } else if (base == "sigmoid") {
        spec.gamma.family = GammaFamily::Identity;
        spec.phi.family = PhiFamily::Sigmoid;
        spec.phi.scale = param.empty() ? 1.0 : parse_positive(param, "sigmoid scale");
    } else if (base == "cex") {
        spec.gamma.family = GammaFamily::CounterexamplePiecewise;
        spec.phi.family = PhiFamily::Exp;
        spec.phi.scale = 1.0;
    } else {
        throw std::invalid_argument("unknown loss preset: " + name);
    }
    return spec;
}

LossSpec parse_loss_config(const std::string& text) {
    LossSpec spec;
    bool have_gamma = false;
    bool have_phi = false;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("loss config: expected key=value, got: " + line);
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "gamma.family") {
            const auto it = kGammaNames.find(value);
            if (it == kGammaNames.end()) {
                throw std::invalid_argument("loss config: unknown gamma.family: " + value);
            }
            spec.gamma.family = it->second;
            have_gamma = true;
        } else if (key == "gamma.T") {
            spec.gamma.temperature = parse_positive(value, "gamma.T");
        } else if (key == "phi.family") {
            const auto it = kPhiNames.find(value);
            if (it == kPhiNames.end()) {
                throw std::invalid_argument("loss config: unknown phi.family: " + value);
            }
            spec.phi.family = it->second;
            have_phi = true;
        } else if (key == "phi.scale") {
            spec.phi.scale = parse_positive(value, "phi.scale");
        } else if (key == "phi.shift") {
            spec.phi.shift = std::stod(value);
        } else if (key == "phi.T") {
            spec.phi.temperature = parse_positive(value, "phi.T");
        } else if (key == "k") {
            spec.k = static_cast<int>(std::stol(value));
        } else {
            throw std::invalid_argument("loss config: unknown key: " + key);
        }
    }
    if (!have_gamma || !have_phi) {
        throw std::invalid_argument("loss config: gamma.family and phi.family are required");
    }
    if (spec.k < 2) throw std::invalid_argument("loss config: k must be >= 2");
    require_gamma_params(spec.gamma);
    require_phi_params(spec.phi);
    return spec;
}

std::string gamma_family_name(GammaFamily f) {
    for (const auto& [name, fam] : kGammaNames) {
        if (fam == f) return name;
    }
    return "?";
}

std::string phi_family_name(PhiFamily f) {
    for (const auto& [name, fam] : kPhiNames) {
        if (fam == f) return name;
    }
    return "?";
}

std::string loss_config_string(const LossSpec& spec) {
    std::ostringstream out;
    out << "gamma.family = " << gamma_family_name(spec.gamma.family) << '\n';
    if (spec.gamma.family == GammaFamily::ScaledLog1p) {
        out << "gamma.T = " << spec.gamma.temperature << '\n';
    }
    out << "phi.family = " << phi_family_name(spec.phi.family) << '\n';
    if (spec.phi.family == PhiFamily::Exp || spec.phi.family == PhiFamily::Sigmoid) {
        out << "phi.scale = " << spec.phi.scale << '\n';
    }
    if (spec.phi.family == PhiFamily::ShiftedScaledExp) {
        out << "phi.shift = " << spec.phi.shift << '\n';
        out << "phi.T = " << spec.phi.temperature << '\n';
    }
    out << "k = " << spec.k << '\n';
    return out.str();
}

}  // namespace gammaphi
