#include <doctest.h>

#include <random>

#include "credence/core.hpp"
#include "credence/payoffs.hpp"
#include "credence/solve.hpp"

using namespace credence;

namespace {

// Second visit walked outcome by outcome: the next expert is honest with
// probability h, an opportunistic one overtreats minor and treats serious.
double second_visit(const ModelParams& p, bool minor) {
    if (minor) return p.h * -p.p_m + (1 - p.h) * -p.p_s;
    return -p.p_s;
}

ConsumerDecisionValues walk(const ModelParams& p, const Beliefs& b) {
    ConsumerDecisionValues v;
    v.accept_serious = -p.p_s;
    v.reject_serious = -p.k + b.tau_s * second_visit(p, false) + (1 - b.tau_s) * second_visit(p, true);
    // an undertreated consumer finds out, returns at k' and buys the serious treatment
    v.accept_minor = b.tau_m * -p.p_m + (1 - b.tau_m) * (-p.p_m - p.k_return - p.p_s);
    v.reject_minor = -p.k + b.tau_m * second_visit(p, true) + (1 - b.tau_m) * second_visit(p, false);
    return v;
}

}  // namespace

TEST_CASE("second-visit play is constant") {
    for (double h : {0.1, 0.5, 0.9}) {
        auto [e, c] = period2_strategies(demo_params(h, 0.3));
        CHECK(e.t_m2 == 0);
        CHECK(e.t_s2 == 1);
        CHECK(c.a_m2 == 1);
        CHECK(c.a_s2 == 1);
    }
}

TEST_CASE("return decision") {
    auto p = demo_params();
    CHECK(return_decision(p) == Revisit::ReturnToInitial);
    p.k_return = 0.99;
    CHECK(return_decision(p) == Revisit::ReturnToInitial);
    p.k_return = 1.5;
    CHECK_THROWS_AS(return_decision(p), Error);
}

TEST_CASE("consumer value examples") {
    auto p = demo_params(0.4, 0.5);
    Beliefs b;
    b.tau_s = 0.4;
    b.tau_m = 0.4;
    auto v = consumer_values(p, b);
    CHECK(v.accept_serious == doctest::Approx(-5.0));
    CHECK(v.reject_serious == doctest::Approx(-5.28));
    CHECK(v.accept_minor == doctest::Approx(-5.0));
    CHECK(v.reject_minor == doctest::Approx(-5.52));
    b.tau_m = 1;
    p.k_return = 0.7;
    CHECK(consumer_values(p, b).accept_minor == doctest::Approx(-2.0));
}

TEST_CASE("consumer values match the outcome walk") {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 2000; ++i) {
        auto p = sample_params(Model::base, rng);
        Beliefs b;
        b.tau_m = u01(rng);
        b.tau_s = u01(rng);
        auto v = consumer_values(p, b);
        auto w = walk(p, b);
        REQUIRE(v.accept_serious == doctest::Approx(w.accept_serious).epsilon(1e-13));
        REQUIRE(v.reject_serious == doctest::Approx(w.reject_serious).epsilon(1e-13));
        REQUIRE(v.accept_minor == doctest::Approx(w.accept_minor).epsilon(1e-13));
        REQUIRE(v.reject_minor == doctest::Approx(w.reject_minor).epsilon(1e-13));
    }
}

TEST_CASE("consumer value properties") {
    std::mt19937_64 rng(22);
    for (int i = 0; i < 2000; ++i) {
        auto p = sample_params(Model::base, rng);
        Beliefs b;
        b.tau_m = u01(rng);
        b.tau_s = u01(rng);
        auto v = consumer_values(p, b);
        REQUIRE(v.reject_serious <= v.accept_serious + p.spread() + 1e-12);
        auto q = p;
        q.k += 1e-3;
        auto w = consumer_values(q, b);
        REQUIRE(w.reject_serious < v.reject_serious);
        REQUIRE(w.reject_minor < v.reject_minor);
        b.tau_s = 1;
        v = consumer_values(p, b);
        REQUIRE(v.accept_serious - v.reject_serious == doctest::Approx(p.k).epsilon(1e-12));
    }
}

TEST_CASE("expert margins") {
    auto p = demo_params();
    ConsumerStrategy c;
    auto m = expert_values(p, c);
    CHECK(m.overtreat_margin == doctest::Approx(2));
    CHECK(m.undertreat_margin == doctest::Approx(1));
    c.a_m1 = c.a_s1 = 0;
    m = expert_values(p, c);
    CHECK(m.overtreat_margin == 0);
    CHECK(m.undertreat_margin == 0);
    c.a_m1 = 1;
    c.a_s1 = 1.0 / 3;
    CHECK(std::abs(expert_values(p, c).overtreat_margin) <= 1e-15);
}

TEST_CASE("margin identity") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 2000; ++i) {
        auto p = sample_params(Model::base, rng);
        ConsumerStrategy c;
        c.a_m1 = u01(rng);
        c.a_s1 = u01(rng);
        auto m = expert_values(p, c);
        REQUIRE(m.overtreat_margin + m.undertreat_margin == doctest::Approx(p.margin_s() * c.a_m1).epsilon(1e-13));
    }
}
