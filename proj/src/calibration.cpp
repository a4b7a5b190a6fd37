#include <gammaphi/calibration.hpp>

#include <gammaphi/report.hpp>
#include <gammaphi/rng.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gammaphi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInteriorFloor = 1e-6;

ProbVector interior_point(Rng& rng, int k) {
    for (;;) {
        Vector w = rng.dirichlet(k);
        if (w.minCoeff() >= kInteriorFloor) return ProbVector(std::move(w));
    }
}

/// Point with exactly `support` positive entries; the rest are exact zeros.
ProbVector face_point(Rng& rng, int k, int support) {
    const std::vector<int> perm = rng.permutation(k);
    Vector inner;
    for (;;) {
        inner = rng.dirichlet(support);
        if (inner.minCoeff() >= kInteriorFloor) break;
    }
    Vector w = Vector::Zero(k);
    for (int i = 0; i < support; ++i) w[perm[i]] = inner[i];
    return ProbVector(std::move(w));
}

}  // namespace

std::vector<ProbVector> sample_simplex(int k, int n, SampleMode mode, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("sample_simplex: k must be >= 2");
    if (n < 1) throw std::invalid_argument("sample_simplex: n must be >= 1");
    Rng rng(seed);
    std::vector<ProbVector> out;
    out.reserve(n);
    switch (mode) {
    case SampleMode::Interior:
        for (int i = 0; i < n; ++i) out.push_back(interior_point(rng, k));
        break;
    case SampleMode::BoundaryFaces:
        // Proper faces with support in {2, ..., k-1}; none exist for k = 2.
        if (k == 2) return out;
        for (int i = 0; i < n; ++i) {
            const int support = 2 + i % (k - 2);
            out.push_back(face_point(rng, k, support));
        }
        break;
    case SampleMode::Stratified: {
        if (k == 2) {
            for (int i = 0; i < n; ++i) out.push_back(interior_point(rng, k));
            break;
        }
        const int boundary = (n + 3) / 4;
        for (int i = 0; i < n - boundary; ++i) out.push_back(interior_point(rng, k));
        for (int i = 0; i < boundary; ++i) {
            const int support = 2 + i % (k - 2);
            out.push_back(face_point(rng, k, support));
        }
        break;
    }
    }
    return out;
}

std::string verdict_name(Verdict v) {
    switch (v) {
    case Verdict::CalibratedEvidence: return "CalibratedEvidence";
    case Verdict::ViolationFound: return "ViolationFound";
    case Verdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

std::optional<GapRecord> calibration_gap(const ProbVector& p, const LossSpec& spec, int y,
                                         const CertifyOptions& opts) {
    if (y < 0 || y >= spec.k) throw std::invalid_argument("calibration_gap: bad class");
    const double max_p = p.weights().maxCoeff();
    if (!(p[y] < max_p - opts.margin)) return std::nullopt;  // hypothesis not met

    const BayesResult bayes = bayes_conditional_risk(p, spec, opts.solver);
    const BayesResult constrained = constrained_bayes_risk(p, spec, y, opts.solver);
    GapRecord rec;
    rec.p = p.weights();
    rec.y = y;
    rec.bayes = bayes.value;
    rec.constrained = constrained.value;
    rec.gap = constrained.value - bayes.value;
    rec.solver_ok = bayes.converged && constrained.converged;
    return rec;
}

CalibrationReport certify(const LossSpec& spec, const SamplingPlan& plan,
                          const CertifyOptions& opts) {
    if (spec.k < 2) throw std::invalid_argument("certify: k must be >= 2");
    if (plan.n < 1) throw std::invalid_argument("certify: empty sampling plan");

    CalibrationReport report;
    report.spec = spec;
    report.plan = plan;
    report.opts = opts;

    // Known-hard probes (r, 1-r, 0, ..., 0) at y = 2, always evaluated first.
    const double probe_rs[] = {0.51, 0.55, 0.6, 2.0 / 3.0};
    for (const double r : probe_rs) {
        Vector w = Vector::Zero(spec.k);
        w[0] = r;
        w[1] = 1.0 - r;
        const ProbVector p(std::move(w));
        if (auto rec = calibration_gap(p, spec, 1, opts)) {
            rec->probe = true;
            report.records.push_back(std::move(*rec));
            ++report.gap_evaluations;
        } else {
            report.skipped_probes.push_back({p.weights(), 1, "hypothesis margin"});
        }
    }

    for (const ProbVector& p : sample_simplex(spec.k, plan.n, plan.mode, plan.seed)) {
        for (int y = 0; y < spec.k; ++y) {
            if (auto rec = calibration_gap(p, spec, y, opts)) {
                report.records.push_back(std::move(*rec));
                ++report.gap_evaluations;
            }
        }
    }

    report.min_gap = kInf;
    for (const GapRecord& rec : report.records) {
        if (!rec.solver_ok) ++report.solver_failures;
        if (rec.gap < report.min_gap) {
            report.min_gap = rec.gap;
            report.witness = rec;
        }
    }

    const bool too_many_failures =
        !report.records.empty() &&
        report.solver_failures > 0.05 * static_cast<double>(report.records.size());
    if (report.records.empty() || too_many_failures) {
        report.verdict = Verdict::Inconclusive;
    } else if (report.min_gap < opts.violation_tol) {
        report.verdict = Verdict::ViolationFound;
    } else if (report.min_gap > opts.evidence_tol) {
        report.verdict = Verdict::CalibratedEvidence;
    } else {
        report.verdict = Verdict::Inconclusive;
    }
    return report;
}

namespace {

nlohmann::json gap_record_json(const GapRecord& rec) {
    nlohmann::json j;
    j["p"] = json_vector(rec.p);
    j["y"] = rec.y + 1;  // classes are 1-based in reports
    j["bayes"] = json_real(rec.bayes);
    j["constrained"] = json_real(rec.constrained);
    j["gap"] = json_real(rec.gap);
    j["origin"] = rec.probe ? "probe" : "sampled";
    j["solver_ok"] = rec.solver_ok;
    return j;
}

const char* mode_name(SampleMode mode) {
    switch (mode) {
    case SampleMode::Interior: return "interior";
    case SampleMode::BoundaryFaces: return "boundary_faces";
    case SampleMode::Stratified: return "stratified";
    }
    return "?";
}

}  // namespace

std::string to_json(const CalibrationReport& report) {
    nlohmann::json j;
    j["schema_version"] = kReportSchemaVersion;
    j["artifact_version"] = kArtifactVersion;
    j["kind"] = "calibration_report";
    j["config"] = {
        {"loss", loss_config_string(report.spec)},
        {"loss_name", report.spec.name},
        {"k", report.spec.k},
        {"n", report.plan.n},
        {"mode", mode_name(report.plan.mode)},
        {"seed", report.plan.seed},
        {"margin", json_real(report.opts.margin)},
        {"violation_tolerance", json_real(report.opts.violation_tol)},
        {"evidence_tolerance", json_real(report.opts.evidence_tol)},
        {"solver_seed", report.opts.solver.seed},
    };
    j["records"] = nlohmann::json::array();
    for (const GapRecord& rec : report.records) j["records"].push_back(gap_record_json(rec));
    j["skipped_probes"] = nlohmann::json::array();
    for (const SkippedProbe& sp : report.skipped_probes) {
        j["skipped_probes"].push_back(
            {{"p", json_vector(sp.p)}, {"y", sp.y + 1}, {"reason", sp.reason}});
    }
    j["min_gap"] = json_real(report.min_gap);
    j["verdict"] = verdict_name(report.verdict);
    if (report.witness) j["witness"] = gap_record_json(*report.witness);
    j["solver_failures"] = report.solver_failures;
    j["gap_evaluations"] = report.gap_evaluations;
    return dump_report(j);
}

}  // namespace gammaphi
