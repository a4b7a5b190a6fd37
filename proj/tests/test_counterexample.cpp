#include <gammaphi/counterexample.hpp>

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace gammaphi;

TEST_CASE("profile anchors") {
    CHECK(f_profile(0.6, 0.0) == 1.0);
    CHECK(f_profile(0.6, 30.0) > 1e12);  // gamma blows up along phi(-x)
    for (double x : {0.3, 1.7, 4.2}) {
        CHECK(std::abs(f_profile(0.5, x) - f_profile(0.5, -x)) < 1e-12);
    }
}

TEST_CASE("derivative anchors at +-ln 2") {
    CHECK(f_derivative(0.6, 0.0) == 0.0);
    for (double r : {0.34, 0.5, 0.6, 2.0 / 3.0}) {
        CHECK(std::abs(f_derivative(r, std::log(2.0)) - (8.0 - 8.5 * r)) < 1e-12);
        CHECK(std::abs(f_derivative(r, -std::log(2.0)) - 0.5 * (1.0 - 17.0 * r)) < 1e-12);
    }
}

TEST_CASE("derivative matches finite differences of the profile") {
    for (double r : {0.4, 0.6, 2.0 / 3.0}) {
        for (int i = 0; i < 500; ++i) {
            const double x = -5.0 + 10.0 * (i + 0.5) / 500.0;
            const double fd =
                oracle::central_diff([&](double t) { return f_profile(r, t); }, x, 1e-6);
            CHECK(oracle::rel_err(fd, f_derivative(r, x)) < 1e-7);
        }
        // C1 at the kink: gamma'(1) = 0 kills the phi jump
        const double fd0 = oracle::central_diff([&](double t) { return f_profile(r, t); }, 0.0, 1e-6);
        CHECK(std::abs(fd0 - 0.0) < 1e-5);
    }
}

TEST_CASE("F' has the sign of x inside [1/3, 2/3]") {
    for (double r : {1.0 / 3.0, 0.5, 0.6, 2.0 / 3.0}) {
        for (int i = 0; i < 2001; ++i) {
            const double x = -5.0 + 10.0 * i / 2000.0;
            if (x == 0.0) continue;
            const double d = f_derivative(r, x);
            CHECK(((x > 0.0 && d > 0.0) || (x < 0.0 && d < 0.0)));
        }
    }
}

TEST_CASE("closed-form zeros of G+ and G-") {
    CHECK_FALSE(g_zero(2.0 / 3.0, GSide::Plus).has_value());  // the zero lands exactly at 0
    CHECK_FALSE(g_zero(0.5, GSide::Plus).has_value());
    CHECK_FALSE(g_zero(0.5, GSide::Minus).has_value());
    CHECK_FALSE(g_zero(1.0 / 3.0, GSide::Minus).has_value());

    const auto plus = g_zero(0.8, GSide::Plus);
    REQUIRE(plus.has_value());
    CHECK(*plus == doctest::Approx(std::log(2.0) / 3.0).epsilon(1e-12));
    const double plus_bisect = oracle::bisect([&](double x) { return g_plus(0.8, x); }, 1e-9, 5.0, 1e-10);
    CHECK(std::abs(*plus - plus_bisect) < 1e-8);
    CHECK(std::abs(f_derivative(0.8, *plus)) < 1e-10);

    const auto minus = g_zero(0.25, GSide::Minus);
    REQUIRE(minus.has_value());
    CHECK(*minus == doctest::Approx(std::log(2.0 / 3.0) / 3.0).epsilon(1e-12));
    const double minus_bisect =
        oracle::bisect([&](double x) { return g_minus(0.25, x); }, -5.0, -1e-9, 1e-10);
    CHECK(std::abs(*minus - minus_bisect) < 1e-8);
    CHECK(std::abs(f_derivative(0.25, *minus)) < 1e-10);
}

TEST_CASE("divergent witness vectors") {
    const Vector w = divergent_witness(3, 2.0);
    CHECK(w[0] == 0.0);
    CHECK(w[1] == 0.5);
    CHECK(w[2] == -2.0);
    const Vector b = divergent_witness(2, 10.0);
    CHECK(b[0] == 0.0);
    CHECK(b[1] == doctest::Approx(0.1));
    for (double t : {0.5, 1.0, 7.0, 300.0}) {
        int am = 0;
        divergent_witness(4, t).maxCoeff(&am);
        CHECK(am == 1);
    }
    CHECK_THROWS_AS(divergent_witness(1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(divergent_witness(3, 0.0), std::invalid_argument);
}

TEST_CASE("witness risk decreases toward the Bayes level") {
    const LossSpec cex = loss_preset("cex", 3);
    for (double r : {0.55, 0.6, 2.0 / 3.0}) {
        Vector w = Vector::Zero(3);
        w[0] = r;
        w[1] = 1.0 - r;
        const ProbVector p(std::move(w));
        double prev = std::numeric_limits<double>::infinity();
        for (double t : {1.0, 2.0, 5.0, 10.0, 100.0, 1000.0}) {
            const double risk = conditional_risk(p, cex, divergent_witness(3, t));
            CHECK(risk < prev);
            CHECK(risk > 1.0);
            prev = risk;
        }
        CHECK(prev - 1.0 < 1e-5);
    }
}

TEST_CASE("verification passes in the qualifying regime") {
    const CexReport rep = verify_counterexample({0.6, 3, {1, 2, 5, 10, 50, 100, 500, 1000}});
    CHECK(rep.pass);
    CHECK(rep.bayes == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(rep.risk_curve.back().second - rep.bayes) < 2e-3);
    for (const CexCheck& c : rep.checks) CHECK(c.pass);
}

TEST_CASE("verification fails for r beyond 2/3") {
    const CexReport rep = verify_counterexample({0.7, 3, {1, 10, 100}});
    CHECK_FALSE(rep.pass);
    bool f_min_failed = false;
    for (const CexCheck& c : rep.checks) {
        if (c.name == "f_unique_minimum") f_min_failed = !c.pass;
    }
    CHECK(f_min_failed);
}

TEST_CASE("verification reports the binary case as non-qualifying") {
    const CexReport rep = verify_counterexample({0.6, 2, {1, 10, 100, 1000}});
    CHECK_FALSE(rep.pass);
    CHECK(rep.note.find("k >= 3") != std::string::npos);
    bool k_check_failed = false;
    for (const CexCheck& c : rep.checks) {
        if (c.name == "k_at_least_3") k_check_failed = !c.pass;
    }
    CHECK(k_check_failed);
}

TEST_CASE("verification input validation") {
    CHECK_THROWS_AS(verify_counterexample({1.5, 3, {1, 10}}), std::invalid_argument);
    CHECK_THROWS_AS(verify_counterexample({0.6, 3, {}}), std::invalid_argument);
    CHECK_THROWS_AS(verify_counterexample({0.6, 3, {10, 1}}), std::invalid_argument);
}

TEST_CASE("csv outputs") {
    const CexReport rep = verify_counterexample({0.6, 3, {1, 10}});
    std::ostringstream risk_csv;
    write_risk_csv(risk_csv, rep);
    CHECK(risk_csv.str().rfind("t,risk\n", 0) == 0);

    std::ostringstream profile;
    write_profile_csv(profile, 0.6, -1.0, 1.0, 5);
    CHECK(profile.str().rfind("x,F,Fprime\n", 0) == 0);
    // five grid rows plus the header
    int lines = 0;
    for (char c : profile.str()) {
        if (c == '\n') ++lines;
    }
    CHECK(lines == 6);
}

TEST_CASE("verification reports are deterministic") {
    const CexParams params{0.6, 3, {1, 10, 100}};
    CHECK(to_json(verify_counterexample(params)) == to_json(verify_counterexample(params)));
}
