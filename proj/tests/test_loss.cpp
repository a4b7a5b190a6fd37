#include <gammaphi/loss.hpp>
#include <gammaphi/rng.hpp>

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace gammaphi;

namespace {

std::vector<LossSpec> named_losses(int k) {
    return {loss_preset("logistic", k),     loss_preset("coherence:1", k),
            loss_preset("pairwise-exp", k), loss_preset("savage", k),
            loss_preset("sigmoid", k),      loss_preset("cex", k)};
}

Vector random_scores(Rng& rng, int k, double lo = -2.0, double hi = 2.0) {
    Vector v(k);
    for (int i = 0; i < k; ++i) v[i] = rng.uniform(lo, hi);
    return v;
}

}  // namespace

TEST_CASE("gamma evaluation anchors") {
    CHECK(gamma_eval({GammaFamily::Log1p}, 0.0) == 0.0);
    const GammaSpec cex{GammaFamily::CounterexamplePiecewise};
    CHECK(gamma_eval(cex, 2.0) == 3.0);
    CHECK(gamma_eval(cex, 0.0) == 0.0);
    CHECK(gamma_eval(cex, 1.0) == 1.0);
    CHECK(gamma_eval({GammaFamily::SquaredRatio}, 1.0) == doctest::Approx(0.25));
    CHECK(gamma_eval({GammaFamily::ScaledLog1p, 2.0}, std::exp(1.0) - 1.0) ==
          doctest::Approx(2.0));
}

TEST_CASE("gamma derivative anchors") {
    CHECK(gamma_deriv({GammaFamily::Log1p}, 0.0) == 1.0);
    const GammaSpec cex{GammaFamily::CounterexamplePiecewise};
    CHECK(gamma_deriv(cex, 1.0) == 0.0);
    CHECK(gamma_deriv(cex, 0.0) == 2.0);
    // One-sided difference at the domain edge; the derivative there is 2 - h.
    const double fd = oracle::forward_diff([&](double x) { return gamma_eval(cex, x); }, 0.0, 1e-6);
    CHECK(std::abs(fd - 2.0) < 1e-5);
}

TEST_CASE("gamma domain and parameter errors") {
    CHECK_THROWS_AS(gamma_eval({GammaFamily::Log1p}, -1e-9), std::domain_error);
    CHECK_THROWS_AS(gamma_deriv({GammaFamily::Log1p}, -1.0), std::domain_error);
    CHECK_THROWS_AS(gamma_eval({GammaFamily::ScaledLog1p, 0.0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(gamma_eval({GammaFamily::ScaledLog1p, -2.0}, 1.0), std::invalid_argument);
}

TEST_CASE("phi evaluation anchors") {
    const PhiSpec exp_phi{PhiFamily::Exp};
    CHECK(phi_eval(exp_phi, 0.0) == 1.0);
    CHECK(phi_deriv(exp_phi, 0.0) == -1.0);
    CHECK(phi_eval(exp_phi, 1.0) == doctest::Approx(0.36787944117144233).epsilon(1e-12));
    PhiSpec sigmoid{PhiFamily::Sigmoid};
    CHECK(phi_eval(sigmoid, 0.0) == 0.5);
    CHECK(phi_deriv(sigmoid, 0.0) == -0.25);
    PhiSpec coherence{PhiFamily::ShiftedScaledExp, 1.0, 1.0, 2.0};
    CHECK(phi_eval(coherence, 1.0) == 1.0);

    PhiSpec bad{PhiFamily::Exp, -1.0};
    CHECK_THROWS_AS(phi_eval(bad, 0.0), std::invalid_argument);
}

TEST_CASE("derivatives match finite differences of the evaluations") {
    Rng rng(11);
    const GammaSpec gammas[] = {{GammaFamily::Log1p},
                                {GammaFamily::ScaledLog1p, 0.5},
                                {GammaFamily::Identity},
                                {GammaFamily::SquaredRatio},
                                {GammaFamily::CounterexamplePiecewise}};
    for (const GammaSpec& g : gammas) {
        for (int i = 0; i < 100; ++i) {
            double x = rng.uniform(0.01, 8.0);
            // away from the piecewise branch point, where the second
            // derivative jumps
            if (g.family == GammaFamily::CounterexamplePiecewise && std::abs(x - 1.0) < 1e-3) {
                continue;
            }
            const double fd =
                oracle::central_diff([&](double t) { return gamma_eval(g, t); }, x, 1e-6);
            CHECK(oracle::rel_err(fd, gamma_deriv(g, x)) < 1e-7);
        }
    }
    const PhiSpec phis[] = {{PhiFamily::Exp},
                            {PhiFamily::Exp, 2.0},
                            {PhiFamily::ShiftedScaledExp, 1.0, 1.0, 0.5},
                            {PhiFamily::Sigmoid}};
    for (const PhiSpec& f : phis) {
        for (int i = 0; i < 100; ++i) {
            const double x = rng.uniform(-4.0, 4.0);
            const double fd =
                oracle::central_diff([&](double t) { return phi_eval(f, t); }, x, 1e-6);
            CHECK(oracle::rel_err(fd, phi_deriv(f, x)) < 1e-7);
        }
    }
}

TEST_CASE("one-sided derivatives at the piecewise branch point") {
    const GammaSpec cex{GammaFamily::CounterexamplePiecewise};
    const auto f = [&](double x) { return gamma_eval(cex, x); };
    const double left = (f(1.0) - f(1.0 - 1e-6)) / 1e-6;
    const double right = oracle::forward_diff(f, 1.0, 1e-6);
    CHECK(std::abs(left - 0.0) < 1e-5);   // -2(x-1) -> 0 from the left
    CHECK(std::abs(right - 0.0) < 1e-5);  // 4(x-1) -> 0 from the right
}

TEST_CASE("loss component anchors") {
    const LossSpec logistic = loss_preset("logistic", 3);
    const Vector l = loss_components(logistic, Vector::Zero(3));
    for (int y = 0; y < 3; ++y) CHECK(l[y] == doctest::Approx(std::log(3.0)).epsilon(1e-12));

    const LossSpec pairwise = loss_preset("pairwise-exp", 2);
    const Vector pe = loss_components(pairwise, Vector{{1.0, 0.0}});
    CHECK(pe[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(pe[1] == doctest::Approx(std::exp(1.0)).epsilon(1e-12));

    const LossSpec cex = loss_preset("cex", 2);
    const Vector ce = loss_components(cex, Vector::Zero(2));
    CHECK(ce[0] == 1.0);
    CHECK(ce[1] == 1.0);
}

TEST_CASE("loss component errors") {
    const LossSpec logistic = loss_preset("logistic", 3);
    CHECK_THROWS_AS(loss_components(logistic, Vector::Zero(2)), std::invalid_argument);
    Vector bad = Vector::Zero(3);
    bad[1] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(loss_components(logistic, bad), std::domain_error);
    bad[1] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(loss_components(logistic, bad), std::domain_error);
}

TEST_CASE("phi overflow saturates through gamma") {
    const LossSpec pairwise = loss_preset("pairwise-exp", 2);
    const Vector l = loss_components(pairwise, Vector{{-800.0, 0.0}});
    CHECK(std::isinf(l[0]));
    CHECK(l[1] == doctest::Approx(std::exp(-800.0)));
    // bounded gamma maps the saturated sum to its supremum
    const LossSpec savage = loss_preset("savage", 2);
    const Vector s = loss_components(savage, Vector{{-800.0, 0.0}});
    CHECK(s[0] == 1.0);
}

TEST_CASE("jacobian anchors and row sums") {
    const LossSpec pairwise = loss_preset("pairwise-exp", 2);
    const Matrix j = loss_jacobian(pairwise, Vector::Zero(2));
    CHECK(j(0, 0) == doctest::Approx(-1.0));
    CHECK(j(0, 1) == doctest::Approx(1.0));
    CHECK(j(1, 0) == doctest::Approx(1.0));
    CHECK(j(1, 1) == doctest::Approx(-1.0));

    Rng rng(3);
    for (const LossSpec& spec : named_losses(4)) {
        const Vector v = random_scores(rng, 4);
        const Matrix jac = loss_jacobian(spec, v);
        for (int y = 0; y < 4; ++y) CHECK(std::abs(jac.row(y).sum()) < 1e-12);
    }
}

TEST_CASE("jacobian matches central finite differences") {
    Rng rng(17);
    const LossSpec logistic = loss_preset("logistic", 3);
    const Vector anchor{{0.3, -0.1, 0.4}};
    const Matrix jac = loss_jacobian(logistic, anchor);
    for (int y = 0; y < 3; ++y) {
        const Vector fd = oracle::fd_gradient(
            [&](const Vector& v) { return loss_components(logistic, v)[y]; }, anchor, 1e-5);
        for (int j = 0; j < 3; ++j) CHECK(oracle::rel_err(jac(y, j), fd[j]) < 1e-6);
    }

    for (const LossSpec& spec : named_losses(3)) {
        for (int trial = 0; trial < 50; ++trial) {
            const Vector v = random_scores(rng, 3);
            if (spec.gamma.family == GammaFamily::CounterexamplePiecewise) {
                bool near_kink = false;
                for (int y = 0; y < 3; ++y) {
                    double acc = 0.0;
                    for (int j = 0; j < 3; ++j) {
                        if (j != y) acc += phi_eval(spec.phi, v[y] - v[j]);
                    }
                    if (std::abs(acc - 1.0) < 1e-3) near_kink = true;
                }
                if (near_kink) continue;
            }
            const Matrix jac = loss_jacobian(spec, v);
            for (int y = 0; y < 3; ++y) {
                const Vector fd = oracle::fd_gradient(
                    [&](const Vector& w) { return loss_components(spec, w)[y]; }, v, 1e-5);
                for (int j = 0; j < 3; ++j) CHECK(oracle::rel_err(jac(y, j), fd[j]) < 1e-6);
            }
        }
    }
}

TEST_CASE("permutation equivariance") {
    // moderate scores keep the reordering noise of the component sums well
    // under the absolute tolerance
    Rng rng(23);
    for (const LossSpec& spec : named_losses(4)) {
        for (int trial = 0; trial < 200; ++trial) {
            const Vector v = random_scores(rng, 4, -1.0, 1.0);
            const std::vector<int> sigma = rng.permutation(4);
            Vector permuted(4);
            for (int j = 0; j < 4; ++j) permuted[j] = v[sigma[j]];
            const Vector lhs = loss_components(spec, permuted);
            const Vector l = loss_components(spec, v);
            for (int j = 0; j < 4; ++j) CHECK(std::abs(lhs[j] - l[sigma[j]]) < 1e-12);
        }
    }
}

TEST_CASE("order compatibility") {
    Rng rng(29);
    for (const LossSpec& spec : named_losses(4)) {
        for (int trial = 0; trial < 200; ++trial) {
            const Vector v = random_scores(rng, 4);
            const Vector l = loss_components(spec, v);
            for (int y = 0; y < 4; ++y) {
                for (int j = 0; j < 4; ++j) {
                    if (v[y] >= v[j]) CHECK(l[y] <= l[j] + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("translation invariance of the components") {
    Rng rng(31);
    for (const LossSpec& spec : named_losses(3)) {
        for (int trial = 0; trial < 200; ++trial) {
            const Vector v = random_scores(rng, 3, -0.8, 0.8);
            const double c = rng.uniform(-0.8, 0.8);
            const Vector shifted = v.array() + c;
            const Vector a = loss_components(spec, v);
            const Vector b = loss_components(spec, shifted);
            for (int y = 0; y < 3; ++y) CHECK(std::abs(a[y] - b[y]) < 1e-12);
        }
    }
}

TEST_CASE("gamma condition checks") {
    const ConditionReport log1p = check_gamma_conditions({GammaFamily::Log1p});
    CHECK(log1p.gamma_si);
    CHECK(log1p.gamma_pd);
    CHECK(log1p.gamma_sup_infinite);

    const ConditionReport cex = check_gamma_conditions({GammaFamily::CounterexamplePiecewise});
    CHECK(cex.gamma_si);
    CHECK_FALSE(cex.gamma_pd);  // derivative vanishes at x = 1
    CHECK(cex.gamma_sup_infinite);

    const ConditionReport savage = check_gamma_conditions({GammaFamily::SquaredRatio});
    CHECK_FALSE(savage.gamma_sup_infinite);
    CHECK_FALSE(savage.gamma_pd);  // derivative vanishes at x = 0
    CHECK(savage.gamma_si);

    CHECK_THROWS_AS(check_gamma_conditions({GammaFamily::Log1p}, GridPlan{0.0, 100.0, 1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(check_gamma_conditions({GammaFamily::Log1p}, GridPlan{0.0, 50.0, 101}),
                    std::invalid_argument);
}

TEST_CASE("gamma_pd implies gamma_si for every shipped family") {
    const GammaSpec gammas[] = {{GammaFamily::Log1p},
                                {GammaFamily::ScaledLog1p, 2.0},
                                {GammaFamily::Identity},
                                {GammaFamily::SquaredRatio},
                                {GammaFamily::CounterexamplePiecewise}};
    for (const GammaSpec& g : gammas) {
        const ConditionReport rep = check_gamma_conditions(g);
        if (rep.gamma_pd) CHECK(rep.gamma_si);
    }
}

TEST_CASE("gamma is non-negative and non-decreasing, phi non-negative and non-increasing") {
    const GammaSpec gammas[] = {{GammaFamily::Log1p},
                                {GammaFamily::ScaledLog1p, 0.5},
                                {GammaFamily::Identity},
                                {GammaFamily::SquaredRatio},
                                {GammaFamily::CounterexamplePiecewise}};
    for (const GammaSpec& g : gammas) {
        double prev = -1.0;
        for (int i = 0; i <= 400; ++i) {
            const double x = 0.25 * i;
            const double value = gamma_eval(g, x);
            CHECK(value >= 0.0);
            CHECK(value >= prev);
            prev = value;
        }
    }
    const PhiSpec phis[] = {{PhiFamily::Exp},
                            {PhiFamily::ShiftedScaledExp, 1.0, 1.0, 2.0},
                            {PhiFamily::Sigmoid}};
    for (const PhiSpec& f : phis) {
        double prev = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= 400; ++i) {
            const double x = -50.0 + 0.25 * i;
            const double value = phi_eval(f, x);
            CHECK(value >= 0.0);
            CHECK(value <= prev);
            prev = value;
        }
    }
}

TEST_CASE("phi condition checks") {
    const ConditionReport exp_rep = check_phi_conditions({PhiFamily::Exp});
    CHECK(exp_rep.phi_ndz);
    CHECK(exp_rep.phi_inf_zero);

    const ConditionReport sig = check_phi_conditions({PhiFamily::Sigmoid});
    CHECK(sig.phi_ndz);
    CHECK(sig.phi_inf_zero);

    // constant stub: derivative is zero everywhere, so NDZ must fail
    const ConditionReport flat = check_phi_conditions_fn([](double) { return 1.0; },
                                                         [](double) { return 0.0; }, false,
                                                         default_phi_grid());
    CHECK_FALSE(flat.phi_ndz);
    CHECK_FALSE(flat.phi_inf_zero);

    CHECK_THROWS_AS(check_phi_conditions({PhiFamily::Exp}, GridPlan{-10.0, 50.0, 101}),
                    std::invalid_argument);
}

TEST_CASE("sufficient conditions per preset") {
    CHECK(check_conditions(loss_preset("logistic", 3)).sufficient_for_calibration());
    CHECK(check_conditions(loss_preset("coherence:0.5", 3)).sufficient_for_calibration());
    CHECK(check_conditions(loss_preset("pairwise-exp", 3)).sufficient_for_calibration());
    CHECK(check_conditions(loss_preset("sigmoid", 3)).sufficient_for_calibration());
    CHECK_FALSE(check_conditions(loss_preset("cex", 3)).sufficient_for_calibration());
    CHECK_FALSE(check_conditions(loss_preset("savage", 3)).sufficient_for_calibration());
    CHECK_FALSE(check_conditions(loss_preset("savage:2", 3)).sufficient_for_calibration());
}

TEST_CASE("loss config round trip and presets") {
    for (const LossSpec& spec : named_losses(4)) {
        const LossSpec parsed = parse_loss_config(loss_config_string(spec));
        CHECK(parsed.gamma.family == spec.gamma.family);
        CHECK(parsed.phi.family == spec.phi.family);
        CHECK(parsed.k == spec.k);
        CHECK(parsed.phi.scale == spec.phi.scale);
    }
    const LossSpec coherent = parse_loss_config(
        "# coherence at T = 2\ngamma.family = scaled_log1p\ngamma.T = 2\n"
        "phi.family = shifted_scaled_exp\nphi.shift = 1\nphi.T = 2\nk = 4\n");
    CHECK(coherent.gamma.temperature == 2.0);
    CHECK(coherent.k == 4);

    CHECK_THROWS_AS(loss_preset("nonsense", 3), std::invalid_argument);
    CHECK_THROWS_AS(loss_preset("logistic", 1), std::invalid_argument);
    CHECK_THROWS_AS(parse_loss_config("gamma.family = log1p\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_loss_config("gamma.family = log1p\nphi.family = exp\nk = 1\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_loss_config("gamma.family = log1p\nphi.family = exp\nbogus = 1\n"),
                    std::invalid_argument);
}

TEST_CASE("savage presets expose both phi scales") {
    const LossSpec s1 = loss_preset("savage", 3);
    CHECK(s1.phi.scale == 1.0);
    const LossSpec s2 = loss_preset("savage:2", 3);
    CHECK(s2.phi.scale == 2.0);
    CHECK(phi_eval(s2.phi, 1.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
}
