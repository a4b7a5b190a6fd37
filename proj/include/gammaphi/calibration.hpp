#pragma once

#include <gammaphi/risk.hpp>

#include <optional>
#include <string>
#include <vector>

namespace gammaphi {

enum class SampleMode { Interior, BoundaryFaces, Stratified };

/// Interior: flat Dirichlet with every entry >= 1e-6. BoundaryFaces: points
/// with exact zeros, cycling over support sizes 2..k-1 (empty for k = 2).
/// Stratified: union with at least a quarter of the points on proper faces.
std::vector<ProbVector> sample_simplex(int k, int n, SampleMode mode, std::uint64_t seed);

/// One evaluated (p, y) pair. gap = constrained - bayes; never below -1e-8
/// beyond solver noise.
struct GapRecord {
    Vector p;
    int y{0};  // 0-based
    double bayes{0.0};
    double constrained{0.0};
    double gap{0.0};
    bool probe{false};
    bool solver_ok{true};
};

enum class Verdict { CalibratedEvidence, ViolationFound, Inconclusive };

std::string verdict_name(Verdict v);

struct CertifyOptions {
    double margin{0.05};          // hypothesis p_y < max(p) - margin
    double violation_tol{1e-4};   // gap below this counts as a violation
    double evidence_tol{1e-3};    // all gaps above this count as evidence
    SolverOptions solver;
};

struct SamplingPlan {
    int n{200};
    SampleMode mode{SampleMode::Stratified};
    std::uint64_t seed{0};
};

struct SkippedProbe {
    Vector p;
    int y{0};
    std::string reason;
};

struct CalibrationReport {
    LossSpec spec;
    SamplingPlan plan;
    CertifyOptions opts;
    std::vector<GapRecord> records;
    std::vector<SkippedProbe> skipped_probes;
    double min_gap{0.0};
    Verdict verdict{Verdict::Inconclusive};
    std::optional<GapRecord> witness;
    int solver_failures{0};
    int gap_evaluations{0};
};

/// Empty when the hypothesis p_y < max(p) - margin does not hold.
std::optional<GapRecord> calibration_gap(const ProbVector& p, const LossSpec& spec, int y,
                                         const CertifyOptions& opts = {});

/// Sweeps sampled (p, y) pairs plus the fixed probe set
/// {(r, 1-r, 0, ..., 0) : r in {0.51, 0.55, 0.6, 2/3}} at y = 2.
/// Deterministic given the plan seed.
CalibrationReport certify(const LossSpec& spec, const SamplingPlan& plan,
                          const CertifyOptions& opts = {});

std::string to_json(const CalibrationReport& report);

}  // namespace gammaphi
