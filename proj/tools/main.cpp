// Command-line front end: condition checks, risk evaluation, calibration
// certification, counterexample verification, and the consistency simulation.
//
// Exit codes: 0 ok, 2 conditions fail, 3 violation found, 4 inconclusive,
// 5 verification fail, 64 usage/config error.

#include <gammaphi/calibration.hpp>
#include <gammaphi/consistency.hpp>
#include <gammaphi/counterexample.hpp>
#include <gammaphi/report.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace gammaphi;

constexpr int kExitOk = 0;
constexpr int kExitConditionsFail = 2;
constexpr int kExitViolation = 3;
constexpr int kExitInconclusive = 4;
constexpr int kExitVerificationFail = 5;
constexpr int kExitUsage = 64;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// --loss accepts an existing config file path or a preset name.
LossSpec resolve_loss(const std::string& arg, int k) {
    if (std::filesystem::exists(arg)) {
        LossSpec spec = parse_loss_config(read_file(arg));
        spec.name = arg;
        return spec;
    }
    return loss_preset(arg, k);
}

std::filesystem::path resolve_output(const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_relative()) {
        if (const char* dir = std::getenv("GAMMAPHI_OUT_DIR")) p = std::filesystem::path(dir) / p;
    }
    return p;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    const auto path = resolve_output(out_path);
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write: " + path.string());
    out << text;
}

std::vector<double> parse_csv_doubles(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    if (out.empty()) throw std::invalid_argument("expected a comma-separated number list");
    return out;
}

nlohmann::json conditions_json(const LossSpec& spec, const ConditionReport& rep) {
    nlohmann::json j;
    j["schema_version"] = kReportSchemaVersion;
    j["artifact_version"] = kArtifactVersion;
    j["kind"] = "condition_report";
    j["config"] = {{"loss", loss_config_string(spec)}, {"loss_name", spec.name}};
    j["gamma_si"] = rep.gamma_si;
    j["gamma_pd"] = rep.gamma_pd;
    j["gamma_sup_infinite"] = rep.gamma_sup_infinite;
    j["phi_ndz"] = rep.phi_ndz;
    j["phi_inf_zero"] = rep.phi_inf_zero;
    j["sufficient_for_calibration"] = rep.sufficient_for_calibration();
    j["evidence"] = nlohmann::json::array();
    for (const ConditionEvidence& e : rep.evidence) {
        j["evidence"].push_back(
            {{"check", e.check}, {"x", json_real(e.x)}, {"value", json_real(e.value)}});
    }
    return j;
}

int run(int argc, char** argv) {
    CLI::App app{"Gamma-Phi multiclass loss toolkit"};
    app.require_subcommand(1);

    // conditions
    auto* conditions = app.add_subcommand("conditions", "check the gamma/phi conditions");
    std::string cond_loss;
    int cond_k = 3;
    std::string cond_out;
    conditions->add_option("--loss", cond_loss, "loss preset or config file")->required();
    conditions->add_option("--k", cond_k, "class count for presets");
    conditions->add_option("-o,--out", cond_out, "report path (default stdout)");

    // certify
    auto* certify_cmd = app.add_subcommand("certify", "sweep calibration gaps over the simplex");
    std::string cert_loss, cert_out, cert_mode = "stratified";
    int cert_k = 0, cert_n = 200;
    std::uint64_t cert_seed = 0;
    CertifyOptions cert_opts;
    certify_cmd->add_option("--loss", cert_loss, "loss preset or config file")->required();
    certify_cmd->add_option("--k", cert_k, "class count")->required();
    certify_cmd->add_option("--n", cert_n, "sample count");
    certify_cmd->add_option("--mode", cert_mode, "interior | boundary_faces | stratified");
    certify_cmd->add_option("--seed", cert_seed, "sampling seed");
    certify_cmd->add_option("--margin", cert_opts.margin, "hypothesis margin on p_y");
    certify_cmd->add_option("--violation-tol", cert_opts.violation_tol, "violation tolerance");
    certify_cmd->add_option("--evidence-tol", cert_opts.evidence_tol, "evidence tolerance");
    certify_cmd->add_option("-o,--out", cert_out, "report path (default stdout)");

    // cex
    auto* cex_cmd = app.add_subcommand("cex", "verify the counterexample construction");
    CexParams cex_params;
    double cex_tol = 1e-2;
    std::string cex_out, cex_csv_prefix, cex_tgrid;
    cex_cmd->add_option("--r", cex_params.r, "probability of class 1")->required();
    cex_cmd->add_option("--k", cex_params.k, "class count")->required();
    cex_cmd->add_option("--tol", cex_tol, "final-gap tolerance");
    cex_cmd->add_option("--t-grid", cex_tgrid, "comma-separated increasing t values");
    cex_cmd->add_option("-o,--out", cex_out, "report path (default stdout)");
    cex_cmd->add_option("--csv-prefix", cex_csv_prefix,
                        "write <prefix>risk.csv and <prefix>profile.csv");

    // risk
    auto* risk_cmd = app.add_subcommand("risk", "evaluate conditional / Bayes risks");
    std::string risk_loss, risk_p, risk_v;
    bool risk_bayes = false;
    int risk_constrained = 0;
    std::uint64_t risk_seed = 0;
    risk_cmd->add_option("--loss", risk_loss, "loss preset or config file")->required();
    risk_cmd->add_option("--p", risk_p, "label distribution, e.g. 0.6,0.4")->required();
    risk_cmd->add_option("--v", risk_v, "score vector, e.g. 0,0");
    risk_cmd->add_flag("--bayes", risk_bayes, "conditional Bayes risk");
    risk_cmd->add_option("--constrained", risk_constrained,
                         "constrained Bayes risk for this class (1-based)");
    risk_cmd->add_option("--seed", risk_seed, "solver seed");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "consistency-transfer simulation");
    std::string sim_dist, sim_loss, sim_csv, sim_tgrid;
    int sim_steps = 500;
    bool sim_adversarial = false;
    std::uint64_t sim_seed = 0;
    sim_cmd->add_option("--dist", sim_dist, "distribution JSON file")->required();
    sim_cmd->add_option("--loss", sim_loss, "loss preset or config file")->required();
    sim_cmd->add_option("--steps", sim_steps, "descent steps");
    sim_cmd->add_flag("--adversarial", sim_adversarial, "divergent-witness trajectory");
    sim_cmd->add_option("--t-grid", sim_tgrid, "t grid for --adversarial");
    sim_cmd->add_option("--csv", sim_csv, "trajectory CSV path (default stdout)");
    sim_cmd->add_option("--seed", sim_seed, "solver seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << '\n';
        return kExitUsage;
    }

    if (conditions->parsed()) {
        const LossSpec spec = resolve_loss(cond_loss, cond_k);
        const ConditionReport rep = check_conditions(spec);
        emit(dump_report(conditions_json(spec, rep)), cond_out);
        return rep.sufficient_for_calibration() ? kExitOk : kExitConditionsFail;
    }

    if (certify_cmd->parsed()) {
        if (cert_k < 2) throw std::invalid_argument("certify: k must be >= 2");
        const LossSpec spec = resolve_loss(cert_loss, cert_k);
        SampleMode mode;
        if (cert_mode == "interior") mode = SampleMode::Interior;
        else if (cert_mode == "boundary_faces") mode = SampleMode::BoundaryFaces;
        else if (cert_mode == "stratified") mode = SampleMode::Stratified;
        else throw std::invalid_argument("certify: unknown mode: " + cert_mode);
        cert_opts.solver.seed = cert_seed;
        const CalibrationReport rep = certify(spec, {cert_n, mode, cert_seed}, cert_opts);
        emit(to_json(rep), cert_out);
        std::cerr << "verdict: " << verdict_name(rep.verdict) << ", min gap " << rep.min_gap;
        if (rep.witness) {
            std::cerr << " at p = [" << rep.witness->p.transpose() << "], y = "
                      << rep.witness->y + 1;
        }
        std::cerr << '\n';
        switch (rep.verdict) {
        case Verdict::CalibratedEvidence: return kExitOk;
        case Verdict::ViolationFound: return kExitViolation;
        case Verdict::Inconclusive: return kExitInconclusive;
        }
    }

    if (cex_cmd->parsed()) {
        if (!cex_tgrid.empty()) cex_params.t_grid = parse_csv_doubles(cex_tgrid);
        const CexReport rep = verify_counterexample(cex_params, cex_tol);
        emit(to_json(rep), cex_out);
        if (!cex_csv_prefix.empty()) {
            std::ofstream risk_csv(resolve_output(cex_csv_prefix + "risk.csv"));
            write_risk_csv(risk_csv, rep);
            std::ofstream profile_csv(resolve_output(cex_csv_prefix + "profile.csv"));
            write_profile_csv(profile_csv, cex_params.r);
        }
        for (const CexCheck& c : rep.checks) {
            std::cerr << (c.pass ? "pass" : "FAIL") << "  " << c.name << ": " << c.detail << '\n';
        }
        if (!rep.note.empty()) std::cerr << "note: " << rep.note << '\n';
        return rep.pass ? kExitOk : kExitVerificationFail;
    }

    if (risk_cmd->parsed()) {
        const std::vector<double> pvals = parse_csv_doubles(risk_p);
        Vector w(static_cast<Eigen::Index>(pvals.size()));
        for (std::size_t i = 0; i < pvals.size(); ++i) w[static_cast<Eigen::Index>(i)] = pvals[i];
        const ProbVector p{std::move(w)};
        const LossSpec spec = resolve_loss(risk_loss, p.k());
        if (spec.k != p.k()) throw std::invalid_argument("risk: loss k does not match --p");
        SolverOptions solver;
        solver.seed = risk_seed;
        const int modes = static_cast<int>(!risk_v.empty()) + static_cast<int>(risk_bayes) +
                          static_cast<int>(risk_constrained != 0);
        if (modes != 1) {
            throw std::invalid_argument("risk: pass exactly one of --v, --bayes, --constrained");
        }
        double value = 0.0;
        if (!risk_v.empty()) {
            const std::vector<double> vvals = parse_csv_doubles(risk_v);
            if (static_cast<int>(vvals.size()) != p.k()) {
                throw std::invalid_argument("risk: --v length must match --p");
            }
            Vector v(p.k());
            for (int i = 0; i < p.k(); ++i) v[i] = vvals[static_cast<std::size_t>(i)];
            value = conditional_risk(p, spec, v);
        } else if (risk_bayes) {
            value = bayes_conditional_risk(p, spec, solver).value;
        } else {
            if (risk_constrained < 1 || risk_constrained > p.k()) {
                throw std::invalid_argument("risk: --constrained class out of range");
            }
            value = constrained_bayes_risk(p, spec, risk_constrained - 1, solver).value;
        }
        std::printf("%.6f\n", value);
        return kExitOk;
    }

    if (sim_cmd->parsed()) {
        const DiscreteDistribution dist = parse_distribution(read_file(sim_dist));
        const LossSpec spec = resolve_loss(sim_loss, dist.k);
        if (spec.k != dist.k) throw std::invalid_argument("simulate: loss k does not match --dist");
        DescentOptions opts;
        opts.solver.seed = sim_seed;
        Trajectory traj;
        if (sim_adversarial) {
            std::vector<double> t_grid = {1, 2, 5, 10, 50, 100, 500, 1000};
            if (!sim_tgrid.empty()) t_grid = parse_csv_doubles(sim_tgrid);
            traj = adversarial_sequence(dist, spec, t_grid, opts);
        } else {
            traj = surrogate_descent(dist, spec, sim_steps, opts);
        }
        std::ostringstream csv;
        write_trajectory_csv(csv, traj);
        emit(csv.str(), sim_csv);
        std::cerr << "bayes 01-risk " << traj.bayes01 << ", surrogate infimum "
                  << traj.surrogate_inf << '\n';
        return kExitOk;
    }

    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
