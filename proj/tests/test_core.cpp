#include <doctest.h>

#include <cstdlib>
#include <random>

#include "credence/core.hpp"
#include "credence/params_io.hpp"
#include "credence/solve.hpp"

using namespace credence;

namespace {

// Posteriors by summing the four (problem, expert type) cells directly.
Beliefs enumerate_beliefs(const ModelParams& p, const ExpertStrategy& e) {
    double minor_true = 0, minor_all = 0, serious_true = 0, serious_all = 0;
    for (int theta = 0; theta < 2; ++theta)
        for (int honest = 0; honest < 2; ++honest) {
            double w = (theta == 0 ? p.mu : 1 - p.mu) * (honest ? p.h : 1 - p.h);
            double truthful = honest ? 1 : (theta == 0 ? e.t_m1 : e.t_s1);
            if (theta == 0) {
                minor_true += w * truthful;
                minor_all += w * truthful;
                serious_all += w * (1 - truthful);
            } else {
                serious_true += w * truthful;
                serious_all += w * truthful;
                minor_all += w * (1 - truthful);
            }
        }
    Beliefs b;
    b.tau_m = minor_true / minor_all;
    b.tau_s = serious_true / serious_all;
    return b;
}

bool has_violation(const ModelParams& p, const std::string& name) {
    for (auto& v : param_violations(p))
        if (v == name) return true;
    return false;
}

}  // namespace

TEST_CASE("demo parameters validate") {
    CHECK(param_violations(demo_params(0.4, 0.5)).empty());
    CHECK_NOTHROW(validate_params(demo_params()));
}

TEST_CASE("constraint violations are named") {
    auto p = demo_params();
    p.p_s = 7;
    CHECK(has_violation(p, "p_s < l_m"));
    p = demo_params();
    p.c_s = 4.5;
    CHECK(has_violation(p, "margin ordering"));
    p.l_m = 4.8;
    try {
        validate_params(p);
        FAIL("expected InvalidParam");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidParam);
        CHECK(e.detail().find("margin ordering") != std::string::npos);
        CHECK(e.detail().find("p_s < l_m") != std::string::npos);
    }
}

TEST_CASE("return cost ordering flips with resentment") {
    auto p = demo_params();
    p.k_return = 1.5;
    CHECK(has_violation(p, "k > k_return"));
    p.resentment = true;
    CHECK(param_violations(p).empty());
    p.k_return = 0.5;
    CHECK(has_violation(p, "k_return > k"));
}

TEST_CASE("expected truthfulness") {
    auto p = demo_params(0.4, 0.5);
    ExpertStrategy e;
    e.t_s1 = 1;
    CHECK(expected_truthfulness(p, e).first == doctest::Approx(1.0));
    e.t_s1 = 0;
    CHECK(expected_truthfulness(p, e).first == doctest::Approx(0.4));
    e.t_s1 = 0.5;
    CHECK(expected_truthfulness(p, e).first == doctest::Approx(0.7));
}

TEST_CASE("posterior examples") {
    auto p = demo_params(0.4, 0.5);
    ExpertStrategy e;
    e.t_m1 = 1;
    e.t_s1 = 1;
    auto b = posterior_beliefs(p, e);
    CHECK(b.tau_m == 1);
    CHECK(b.tau_s == 1);

    e = {};
    b = posterior_beliefs(p, e);
    CHECK(b.tau_m == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(b.tau_s == doctest::Approx(0.4).epsilon(1e-14));

    // tbar_m = 0.9 and tbar_s = 0.4 at h = 0.4
    p = demo_params(0.4, 0.8);
    e.t_m1 = (0.9 - 0.4) / 0.6;
    e.t_s1 = 0;
    b = posterior_beliefs(p, e);
    CHECK(b.tau_m == doctest::Approx(0.72 / 0.84).epsilon(1e-14));
    auto o = enumerate_beliefs(p, e);
    CHECK(b.tau_m == doctest::Approx(o.tau_m).epsilon(1e-14));
    CHECK(b.tau_s == doctest::Approx(o.tau_s).epsilon(1e-14));
}

TEST_CASE("zero-probability arm uses the off-path convention or raises") {
    // mu = 1 is outside the valid range; it kills the serious arm
    auto p = demo_params(0.5, 1.0);
    ExpertStrategy e;
    e.t_m1 = 1;
    e.t_s1 = 1;
    auto b = posterior_beliefs(p, e);
    CHECK(b.tau_s == kOffPathTruthful);
    b = posterior_beliefs(p, e, 0.25);
    CHECK(b.tau_s == 0.25);
    CHECK_THROWS_AS(posterior_beliefs(p, e, std::nullopt), Error);
}

TEST_CASE("beliefs property sweep") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 10000; ++i) {
        auto p = sample_params(Model::base, rng);
        ExpertStrategy e;
        e.t_m1 = u01(rng);
        e.t_s1 = u01(rng);
        auto b = posterior_beliefs(p, e);
        REQUIRE(b.tau_m >= 0);
        REQUIRE(b.tau_m <= 1);
        REQUIRE(b.tau_s >= 0);
        REQUIRE(b.tau_s <= 1);
        REQUIRE(b.tbar_m >= p.h - 1e-15);
        REQUIRE(b.tbar_s >= p.h - 1e-15);
        double pm = p.mu * b.tbar_m + (1 - p.mu) * (1 - b.tbar_s);
        double ps = (1 - p.mu) * b.tbar_s + p.mu * (1 - b.tbar_m);
        REQUIRE(std::abs(b.tau_m * pm - p.mu * b.tbar_m) <= 1e-15);
        REQUIRE(std::abs(b.tau_s * ps - (1 - p.mu) * b.tbar_s) <= 1e-15);
        auto o = enumerate_beliefs(p, e);
        REQUIRE(std::abs(b.tau_m - o.tau_m) <= 1e-13);
        REQUIRE(std::abs(b.tau_s - o.tau_s) <= 1e-13);
    }
}

TEST_CASE("tau_m is nondecreasing in both truthfulness probabilities") {
    std::mt19937_64 rng(12);
    const double d = 1e-6;
    for (int i = 0; i < 2000; ++i) {
        auto p = sample_params(Model::base, rng);
        ExpertStrategy e;
        e.t_m1 = u01(rng) * (1 - d);
        e.t_s1 = u01(rng) * (1 - d);
        double t0 = posterior_beliefs(p, e).tau_m;
        auto a = e;
        a.t_m1 += d;
        auto b = e;
        b.t_s1 += d;
        REQUIRE(posterior_beliefs(p, a).tau_m >= t0 - 1e-15);
        REQUIRE(posterior_beliefs(p, b).tau_m >= t0 - 1e-15);
    }
}

TEST_CASE("parameter documents") {
    auto j = params_to_json(demo_params(0.4, 0.5));
    auto p = params_from_json(j);
    CHECK(p.h == 0.4);
    CHECK(p.l_s == 10);

    auto missing = j;
    missing.erase("k");
    try {
        params_from_json(missing);
        FAIL("expected Schema");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Schema);
        CHECK(e.detail().find("'k'") != std::string::npos);
    }
    auto extra = j;
    extra["colour"] = 1;
    CHECK_THROWS_AS(params_from_json(extra), Error);
    auto knob = j;
    knob["chi"] = 0.5;
    CHECK(params_from_json(knob).chi.value() == 0.5);
    auto flag = j;
    flag["hidden_history"] = 1;
    CHECK_THROWS_AS(params_from_json(flag), Error);
}

TEST_CASE("model selection from knobs") {
    auto p = demo_params();
    CHECK(infer_model(p) == Model::base);
    p.chi = 0.2;
    CHECK(infer_model(p) == Model::capacity);
    p.delta = 0.3;
    CHECK_THROWS_AS(infer_model(p), Error);
    auto q = demo_params();
    try {
        prepare_params(Model::capacity, q);
        FAIL("expected Schema");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Schema);
        CHECK(exit_code_for(e.kind()) == 2);
        CHECK(e.detail().find("chi") != std::string::npos);
    }
}

TEST_CASE("tolerance override") {
    setenv("CREDENCE_TOL", "1e-6", 1);
    CHECK(default_tol() == 1e-6);
    setenv("CREDENCE_TOL", "junk", 1);
    CHECK(default_tol() == kDefaultTol);
    unsetenv("CREDENCE_TOL");
    CHECK(default_tol() == kDefaultTol);
}
