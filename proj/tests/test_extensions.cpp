#include <doctest.h>

#include <cmath>
#include <random>

#include "credence/equilibrium.hpp"
#include "credence/extensions.hpp"
#include "credence/oracle.hpp"
#include "credence/solve.hpp"

using namespace credence;

namespace {

bool same_profile(const EquilibriumProfile& a, const EquilibriumProfile& b, double tol) {
    return a.regime == b.regime && std::abs(a.expert.t_m1 - b.expert.t_m1) <= tol &&
           std::abs(a.expert.t_s1 - b.expert.t_s1) <= tol && std::abs(a.consumer.a_m1 - b.consumer.a_m1) <= tol &&
           std::abs(a.consumer.a_s1 - b.consumer.a_s1) <= tol;
}

// d mu_eps_2 / d eps at eps = 0 as printed
double printed_d_mu2(const ModelParams& p) {
    const double h = p.h, k = p.k, d = p.spread(), ls = p.l_s, ps = p.p_s, pm = p.p_m;
    double num = (1 - 2 * h) * k * (h * d - k) + h * h * (1 - h) * ((ls - ps + pm) * (h * d - k) + d * k);
    double den = h * k + (1 - h) * (h * d - k);
    return num / (den * den);
}

template <class F>
void certify(Model m, int n, std::uint64_t seed, F&& check) {
    std::mt19937_64 rng(seed);
    int certified = 0;
    for (int i = 0; i < n; ++i) {
        auto p = sample_params(m, rng);
        EquilibriumProfile eq;
        try {
            eq = solve(m, p);
        } catch (const Error& e) {
            REQUIRE(e.kind() == ErrorKind::EpsilonTooLarge);
            continue;
        }
        if (eq.regime == Regime::NONE) continue;
        auto r = oracle::verify_equilibrium(p, eq);
        REQUIRE_MESSAGE(r.is_equilibrium, model_name(m) << " gain " << r.max_gain << " at " << r.witness_set);
        check(p, eq);
        ++certified;
    }
    CHECK(certified > 0);
}

}  // namespace

TEST_CASE("diagnostic error: thresholds and the bound") {
    auto p = demo_params(0.5, 0.5);
    p.epsilon = 0.0;
    CHECK(epsilon_star(p) == doctest::Approx(1.0 / 3).epsilon(1e-14));
    auto t = epsilon_thresholds(p);
    CHECK(t.mu_1 == doctest::Approx(2.0 / 7).epsilon(1e-14));
    CHECK(t.mu_2 == doctest::Approx(2.0 / 3).epsilon(1e-14));
    p.epsilon = 0.4;
    try {
        epsilon_equilibrium(p);
        FAIL("expected EpsilonTooLarge");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EpsilonTooLarge);
        CHECK(exit_code_for(e.kind()) == 3);
    }
}

TEST_CASE("diagnostic error reduces to the base model at zero") {
    std::mt19937_64 rng(51);
    for (int i = 0; i < 500; ++i) {
        auto p = sample_params(Model::base, rng);
        auto base = classify_equilibrium(p);
        auto q = p;
        q.epsilon = 0.0;
        auto t = epsilon_thresholds(q);
        auto r = regime_thresholds(p);
        REQUIRE(t.mu_1 == doctest::Approx(r.mu_1_star).epsilon(1e-12));
        REQUIRE(t.mu_2 == doctest::Approx(r.mu_2_star).epsilon(1e-12));
        auto eq = epsilon_equilibrium(q);
        REQUIRE(same_profile(eq, base, 1e-12));
    }
}

TEST_CASE("error-rate effect signs") {
    auto e = epsilon_error_rate_effect(demo_params(0.4, 0.5));
    CHECK(e.sign_mu_2 == "+");
    CHECK(e.d_mu_2 == doctest::Approx(printed_d_mu2(demo_params(0.4, 0.5))).epsilon(1e-4));
    e = epsilon_error_rate_effect(demo_params(0.95, 0.5));
    CHECK(e.sign_mu_2 == "-");
    // below k/(p_s-p_m) the serious threshold is pinned at 1
    e = epsilon_error_rate_effect(demo_params(0.3, 0.5));
    CHECK(e.sign_mu_2 == "0");
    // the printed derivative is positive at h = 1/2, not zero
    e = epsilon_error_rate_effect(demo_params(0.5, 0.5));
    CHECK(e.d_mu_2 == doctest::Approx(0.8125 / 0.5625).epsilon(1e-4));
}

TEST_CASE("finite-difference threshold slope matches the printed derivative") {
    std::mt19937_64 rng(52);
    int n = 0;
    for (int i = 0; i < 2000 && n < 200; ++i) {
        auto p = sample_params(Model::base, rng);
        if (p.h * p.spread() < p.k * 1.05) continue;
        ++n;
        auto e = epsilon_error_rate_effect(p, 1e-7);
        REQUIRE(e.d_mu_2 == doctest::Approx(printed_d_mu2(p)).epsilon(1e-4).scale(1e-6));
    }
    CHECK(n == 200);
}

TEST_CASE("diagnostic error profiles certify") {
    certify(Model::epsilon, 300, 53, [](const ModelParams&, const EquilibriumProfile& eq) {
        if (eq.regime == Regime::POFU || eq.regime == Regime::FOPU) REQUIRE(eq.requires_oracle);
    });
}

TEST_CASE("capacity: thresholds at the demo point") {
    auto p = demo_params(0.5, 0.5);
    p.chi = 0.5;
    auto t = capacity_thresholds(p);
    CHECK(t.chi_star == doctest::Approx(1.0 / 3).epsilon(1e-14));
    CHECK(t.mu[3] == doctest::Approx(4 / 4.625).epsilon(1e-12));
    for (double mu : {0.1, 0.5, 0.86}) {
        p.mu = mu;
        auto eq = capacity_equilibrium(p);
        CHECK(eq.expert.t_s1 == 1);
        CHECK(eq.extra("strategic_undertreatment") == 0);
    }
    p.mu = 0.9;
    auto eq = capacity_equilibrium(p);
    CHECK(eq.regime == Regime::POFU);
    CHECK(eq.expert.t_s1 == 0);
    CHECK(eq.extra("strategic_undertreatment") == 1);
}

TEST_CASE("capacity reduces to the base model at zero") {
    std::mt19937_64 rng(54);
    for (int i = 0; i < 500; ++i) {
        auto p = sample_params(Model::base, rng);
        auto q = p;
        q.chi = 0.0;
        REQUIRE(same_profile(capacity_equilibrium(q), classify_equilibrium(p), 1e-12));
    }
}

TEST_CASE("capacity: behavioural switch at chi_star") {
    std::mt19937_64 rng(55);
    int low = 0, high = 0;
    for (int i = 0; i < 20000 && (low < 500 || high < 500); ++i) {
        auto p = sample_params(Model::capacity, rng);
        auto t = capacity_thresholds(p);
        auto eq = capacity_equilibrium(p);
        if (eq.regime == Regime::NONE) continue;
        if (!oracle::verify_equilibrium(p, eq).is_equilibrium) FAIL("uncertified capacity profile");
        if (*p.chi < t.chi_star && low < 500) {
            ++low;
            REQUIRE(eq.expert.t_s1 < 1);
        } else if (*p.chi > t.chi_star && p.mu < t.mu[3] && high < 500) {
            ++high;
            REQUIRE(eq.expert.t_s1 == 1);
        }
    }
    CHECK(low == 500);
    CHECK(high == 500);
}

TEST_CASE("capacity profiles certify") {
    certify(Model::capacity, 300, 56, [](const ModelParams&, const EquilibriumProfile& eq) {
        REQUIRE(eq.extra("strategic_undertreatment") == (eq.expert.t_s1 < 1 ? 1 : 0));
    });
}

TEST_CASE("hidden history: demo thresholds and regimes") {
    auto p = demo_params(0.5, 0.5);
    p.hidden_history = true;
    auto t = hidden_thresholds(p);
    CHECK(t.mu_1 == 0);
    CHECK(t.mu_3 == 0);
    CHECK(t.mu_2 == doctest::Approx(0.9).epsilon(1e-12));
    for (double mu : {0.05, 0.3, 0.6, 0.89}) {
        p.mu = mu;
        CHECK(hidden_history_equilibrium(p).regime == Regime::FOFU);
    }
}

TEST_CASE("visit posteriors") {
    auto p = demo_params(0.5, 0.5);
    p.hidden_history = true;
    ExpertStrategy e;
    e.t_m1 = 1;
    e.t_s1 = 1;
    auto v = visit_posteriors(p, e, ConsumerStrategy{});
    CHECK(v.gamma_m == 1);
    CHECK(v.gamma_s == 1);
    // against the tree's own flow accounting at random strategies
    std::mt19937_64 rng(57);
    for (int i = 0; i < 500; ++i) {
        auto q = sample_params(Model::hidden_history, rng);
        ExpertStrategy x;
        x.t_m1 = u01(rng);
        x.t_s1 = u01(rng);
        ConsumerStrategy c;
        c.a_m1 = u01(rng);
        c.a_s1 = u01(rng);
        auto g = visit_posteriors(q, x, c);
        auto ev = oracle::evaluate(Model::hidden_history, q, x, c);
        REQUIRE(g.gamma_m == doctest::Approx(ev.gamma_m).epsilon(1e-12));
        REQUIRE(g.gamma_s == doctest::Approx(ev.gamma_s).epsilon(1e-12));
        REQUIRE(g.gamma_mm == doctest::Approx(ev.gamma_mm).epsilon(1e-12));
        REQUIRE(g.gamma_sm == doctest::Approx(ev.gamma_sm).epsilon(1e-12));
    }
}

TEST_CASE("hidden history lowers welfare where known history mixes") {
    for (int i = 0; i < 50; ++i) {
        double mu = 2.0 / 3 + (0.9 - 2.0 / 3) * (i + 0.5) / 50;
        auto known = demo_params(0.5, mu);
        auto hidden = known;
        hidden.hidden_history = true;
        auto a = classify_equilibrium(known);
        auto b = hidden_history_equilibrium(hidden);
        REQUIRE(a.regime == Regime::POFU);
        double cw_known = profile_outcome(known, a).welfare;
        double cw_hidden = profile_outcome(hidden, b).welfare;
        double tbar_m = known.h + (1 - known.h) * a.expert.t_m1;
        REQUIRE(cw_hidden < cw_known);
        REQUIRE(std::abs((cw_known - cw_hidden) - mu * (tbar_m - known.h) * known.spread()) <= 1e-9);
    }
}

TEST_CASE("hidden history profiles certify") {
    certify(Model::hidden_history, 300, 58, [](const ModelParams&, const EquilibriumProfile& eq) {
        REQUIRE(!std::isnan(eq.extra("gamma_m")));
    });
}
