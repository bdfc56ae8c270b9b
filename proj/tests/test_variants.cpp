#include <doctest.h>

#include <cmath>
#include <random>

#include "credence/equilibrium.hpp"
#include "credence/oracle.hpp"
#include "credence/solve.hpp"
#include "credence/variants.hpp"

using namespace credence;

namespace {

template <class F>
void certify(Model m, int n, std::uint64_t seed, F&& check, bool hidden = false) {
    std::mt19937_64 rng(seed);
    int certified = 0;
    for (int i = 0; i < n; ++i) {
        auto p = sample_params(m, rng, hidden);
        auto eq = solve(m, p);
        if (eq.regime == Regime::NONE) continue;
        auto r = oracle::verify_equilibrium(p, eq);
        REQUIRE_MESSAGE(r.is_equilibrium, model_name(m) << " gain " << r.max_gain << " at " << r.witness_set);
        check(p, eq);
        ++certified;
    }
    CHECK(certified > 0);
}

ModelParams with_flag(ModelParams p, Model m) { return prepare_params(m, p); }

}  // namespace

TEST_CASE("refund contract") {
    auto p = with_flag(demo_params(0.5, 0.9), Model::alt_contract);
    CHECK(alt_contract_threshold(p) == doctest::Approx(0.8).epsilon(1e-12));
    auto eq = alternative_contract_equilibrium(p);
    CHECK(eq.expert.t_s1 == 0);
    CHECK(eq.expert.t_m1 == doctest::Approx(1 - 0.1 * 0.5 / (0.9 * 0.5 * 0.5)).epsilon(1e-12));

    // p_s - p_m < c_s, and h below k/(p_s - p_m): no undertreatment at any mu
    auto q = with_flag(demo_params(0.5, 0.5), Model::alt_contract);
    q.p_s = 4;
    auto r = with_flag(demo_params(0.2, 0.5), Model::alt_contract);
    for (int i = 1; i < 100; ++i) {
        q.mu = r.mu = i / 100.0;
        CHECK(alternative_contract_equilibrium(q).expert.t_s1 == 1);
        CHECK(alternative_contract_equilibrium(r).expert.t_s1 == 1);
    }
}

TEST_CASE("refund contract profiles certify") {
    certify(Model::alt_contract, 300, 61, [](const ModelParams&, const EquilibriumProfile&) {});
}

TEST_CASE("delayed discovery map") {
    auto p = demo_params(0.5, 0.5);
    p.delta = 0.5;
    auto t = delta_thresholds(p);
    CHECK(t.pivot == doctest::Approx(1.0 / 3).epsilon(1e-14));
    CHECK(t.mu_3 == doctest::Approx(0.8).epsilon(1e-12));
    for (double mu : {0.2, 0.5, 0.79}) {
        p.mu = mu;
        CHECK(delayed_discovery_equilibrium(p).regime == Regime::FONU);
    }
    p.mu = 0.9;
    CHECK(delayed_discovery_equilibrium(p).regime == Regime::POFU);

    // below the pivot the base-like map returns, and mu_1 tends to mu_1_star
    p.delta = 1e-9;
    t = delta_thresholds(p);
    CHECK(t.mu_1 == doctest::Approx(2.0 / 7).epsilon(1e-7));
    CHECK(std::abs(t.mu_1_printed - 2.0 / 7) > 0.1);
    p.delta = 0.1;
    p.mu = 0.1;
    CHECK(delayed_discovery_equilibrium(p).regime == Regime::FOPU);
    p.mu = 0.5;
    CHECK(delayed_discovery_equilibrium(p).regime == Regime::FOFU);
    p.mu = 0.9;
    CHECK(delayed_discovery_equilibrium(p).regime == Regime::POFU);
}

TEST_CASE("delayed discovery profiles certify") {
    certify(Model::delta, 300, 62, [](const ModelParams&, const EquilibriumProfile&) {});
}

TEST_CASE("resentment with known history") {
    auto p = demo_params(0.5, 0.2);
    p.k_return = 1.5;
    auto eq = resentment_equilibrium(p);
    CHECK(eq.regime == Regime::FONU);
    CHECK(eq.expert.t_m1 == 0);
    CHECK(eq.expert.t_s1 == 1);
    CHECK(eq.consumer.a_m1 == 1);
    CHECK(eq.consumer.a_s1 == 1);
    p.mu = 0.9;
    eq = resentment_equilibrium(p);
    CHECK(eq.expert.t_s1 == 1);
    double tbar_m = p.h + (1 - p.h) * eq.expert.t_m1;
    CHECK(tbar_m == doctest::Approx(1 - 0.1 * 1 / (0.9 * (0.5 * 3 - 1))).epsilon(1e-12));

    auto q = demo_params(0.5, 0.5);
    try {
        resentment_equilibrium(q);
        FAIL("expected NotResentment");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotResentment);
    }
}

TEST_CASE("resentment with known history never undertreats") {
    certify(Model::resentment, 300, 63,
            [](const ModelParams&, const EquilibriumProfile& eq) { REQUIRE(eq.expert.t_s1 == 1); });
}

TEST_CASE("resentment with hidden history") {
    auto p = demo_params(0.6, 0.5);
    p.k_return = 1.5;
    p.hidden_history = true;
    for (int i = 1; i < 50; ++i) {
        p.mu = i / 50.0;
        auto eq = resentment_equilibrium(p);
        CHECK(eq.regime != Regime::POFU);
        CHECK(eq.regime != Regime::FOPU_MS);
    }
    certify(Model::resentment, 300, 64, [](const ModelParams&, const EquilibriumProfile&) {}, true);
}

TEST_CASE("heterogeneous capability") {
    auto p = demo_params(0.5, 0.5);
    p.alpha = 0.5;
    auto t = alpha_thresholds(p);
    CHECK(t.pivot == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(t.mu_1 == doctest::Approx(0.375 / 1.6875).epsilon(1e-12));
    CHECK(tau_h(0.5, 1) == 0);
    auto eq = heterogeneous_capability_equilibrium(p);
    CHECK(eq.expert.t_s1 == 1);
    CHECK(eq.expert.t_m1 == 0);
    // tau_h against the tree's cell count at random strategies
    std::mt19937_64 rng(65);
    for (int i = 0; i < 300; ++i) {
        auto q = sample_params(Model::heterogeneity, rng);
        ExpertStrategy e;
        e.t_s1 = u01(rng);
        auto ev = oracle::evaluate(Model::heterogeneity, q, e, ConsumerStrategy{});
        REQUIRE(ev.tau_h == doctest::Approx(tau_h(*q.alpha, e.t_s1)).epsilon(1e-12));
    }
}

TEST_CASE("heterogeneous capability profiles certify") {
    certify(Model::heterogeneity, 300, 66, [](const ModelParams&, const EquilibriumProfile& eq) {
        REQUIRE(eq.expert.t_s1 == 1);
        REQUIRE(eq.expert.t_m1 == 0);
    });
}

TEST_CASE("endogenous prices") {
    auto p = with_flag(demo_params(0.5, 0.9), Model::endogenous_price);
    auto q = endogenous_prices(p);
    CHECK(q.p_m_star == 6);
    CHECK(q.p_s_star == 7);
    CHECK(q.p_s_star - p.c_s == q.p_m_star - p.c_m);
    CHECK(endogenous_mu_bound(p) == doctest::Approx(5.0 / 6).epsilon(1e-14));
    p.mu = 0.5;
    auto eq = endogenous_price_equilibrium(p);
    CHECK(eq.regime == Regime::NONE);
    CHECK(eq.status == Status::NoPureEquilibrium);

    // at l_s = 10 a consumer told "minor" does better quitting than paying
    // 6 now and 7 later, so the tree rejects the profile
    p.mu = 0.9;
    ExpertStrategy e{1, 0, 1, 1};
    ConsumerStrategy c;
    auto r = oracle::verify_equilibrium(Model::endogenous_price, p, e, c);
    CHECK_FALSE(r.is_equilibrium);
    CHECK(r.max_gain == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(endogenous_price_equilibrium(p).regime == Regime::NONE);

    p.l_s = 14;
    eq = endogenous_price_equilibrium(p);
    CHECK(eq.regime == Regime::NOFU);
    CHECK(eq.expert.t_m1 == 1);
    CHECK(eq.expert.t_s1 == 0);
    CHECK(oracle::verify_equilibrium(p, eq).is_equilibrium);
}

TEST_CASE("endogenous price profiles certify") {
    std::mt19937_64 rng(67);
    int found = 0;
    for (int i = 0; i < 200000 && found < 50; ++i) {
        auto p = sample_params(Model::endogenous_price, rng);
        auto eq = endogenous_price_equilibrium(p);
        REQUIRE(eq.expert.t_s1 < 1);
        if (eq.regime == Regime::NONE) continue;
        ++found;
        REQUIRE(oracle::verify_equilibrium(p, eq).is_equilibrium);
    }
    CHECK(found == 50);
}
