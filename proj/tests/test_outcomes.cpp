#include <doctest.h>

#include <cmath>
#include <random>

#include "credence/equilibrium.hpp"
#include "credence/oracle.hpp"
#include "credence/outcomes.hpp"
#include "credence/solve.hpp"

using namespace credence;

TEST_CASE("profit examples") {
    auto p = demo_params(0.5, 0.5);
    auto eq = classify_equilibrium(p);
    CHECK(expert_profit(p, eq) == doctest::Approx(3.5).epsilon(1e-14));
    p.mu = 0.2;
    eq = classify_equilibrium(p);
    REQUIRE(eq.regime == Regime::FOPU);
    CHECK(expert_profit(p, eq) == 3);
    p.mu = 0.1;
    CHECK(expert_profit(p, classify_equilibrium(p)) == 3);
    p.mu = 0.8;
    eq = classify_equilibrium(p);
    REQUIRE(eq.regime == Regime::POFU);
    CHECK(expert_profit(p, eq) == doctest::Approx(1.6).epsilon(1e-14));
}

TEST_CASE("welfare examples") {
    auto p = demo_params(0.4, 0.5);
    auto eq = classify_equilibrium(p);
    REQUIRE(eq.regime == Regime::FOFU);
    // by hand: -k - [0.5(0.4*2 + 0.6*5) + 0.5(0.4*5 + 0.6*7)]
    CHECK(consumer_welfare(p, eq) == doctest::Approx(-6.0).epsilon(1e-14));
    CHECK(consumer_welfare(p, eq, false) == doctest::Approx(-5.0).epsilon(1e-14));

    p = demo_params(1 - 1e-12, 0.3);
    eq = classify_equilibrium(p);
    REQUIRE(eq.regime == Regime::FOFU);
    CHECK(consumer_welfare(p, eq) == doctest::Approx(-(0.3 * 3 + 0.7 * 6)).epsilon(1e-9));
}

TEST_CASE("extension tags have no base closed form") {
    EquilibriumProfile eq;
    eq.regime = Regime::FONU;
    CHECK_THROWS_AS(expert_profit(demo_params(), eq), Error);
    CHECK_THROWS_AS(consumer_welfare(demo_params(), eq), Error);
}

TEST_CASE("closed forms match the payoff tree") {
    std::mt19937_64 rng(41);
    for (int i = 0; i < 1000; ++i) {
        auto p = sample_params(Model::base, rng);
        auto eq = classify_equilibrium(p);
        if (eq.regime == Regime::NONE) continue;
        auto ev = oracle::evaluate(Model::base, p, eq.expert, eq.consumer);
        REQUIRE(expert_profit(p, eq) == doctest::Approx(ev.profit).epsilon(1e-12));
        REQUIRE(consumer_welfare(p, eq) == doctest::Approx(ev.welfare).epsilon(1e-12));
        REQUIRE(consumer_welfare(p, eq) <= 0);
        REQUIRE(expert_profit(p, eq) >= 0);
    }
}

TEST_CASE("FOFU profit exceeds both mixed-regime profits") {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 2000; ++i) {
        auto p = sample_params(Model::base, rng);
        auto eq = classify_equilibrium(p);
        if (eq.regime != Regime::FOFU) continue;
        EquilibriumProfile a = eq, b = eq;
        a.regime = Regime::POFU;
        b.regime = Regime::FOPU;
        REQUIRE(expert_profit(p, eq) > expert_profit(p, a));
        REQUIRE(expert_profit(p, eq) > expert_profit(p, b));
    }
}

TEST_CASE("welfare jumps up when crossing into FOPU") {
    std::mt19937_64 rng(43);
    int seen = 0;
    for (int i = 0; i < 2000 && seen < 200; ++i) {
        auto p = sample_params(Model::base, rng);
        auto t = regime_thresholds(p);
        if (t.empty_fopu || t.mu_1_star >= t.mu_2_star || t.mu_1_star < 0.01) continue;
        auto lo = p, hi = p;
        lo.mu = t.mu_1_star * (1 - 1e-7);
        hi.mu = t.mu_1_star * (1 + 1e-7);
        auto a = classify_equilibrium(lo), b = classify_equilibrium(hi);
        if (a.regime != Regime::FOPU || b.regime != Regime::FOFU) continue;
        ++seen;
        // same mu on both sides, so only the regime changes
        EquilibriumProfile fofu = b;
        double gap = consumer_welfare(lo, a) - consumer_welfare(lo, fofu);
        double tbar_s = lo.h + (1 - lo.h) * a.expert.t_s1;
        REQUIRE(gap > 0);
        REQUIRE(gap == doctest::Approx((1 - lo.mu) * (tbar_s - lo.h) * (lo.p_m + lo.k_return)).epsilon(1e-10));
    }
    CHECK(seen > 50);
}

TEST_CASE("statics thresholds") {
    auto p = demo_params(0.5, 0.2);
    auto s = statics_thresholds(p);
    CHECK(s.mu_3_star == doctest::Approx(1.0 / (5 - 2 * std::sqrt(3.0))).epsilon(1e-14));
    CHECK(s.mu_3_star == doctest::Approx(0.651084).epsilon(1e-6));
    CHECK(s.h_2_star == doctest::Approx(5.0 / 12).epsilon(1e-14));
    CHECK(s.h_3_star == doctest::Approx(5.0 / 6).epsilon(1e-14));
    CHECK(s.h_1_star == doctest::Approx(2.0 / 3).epsilon(1e-12));
    // h_1_star is where mu_1_star(h) meets mu
    auto q = demo_params(s.h_1_star, 0.2);
    CHECK(regime_thresholds(q).mu_1_star == doctest::Approx(0.2).epsilon(1e-12));

    auto e = demo_params();
    e.p_s = 3;
    e.c_s = 1.5;
    e.k = 1;  // k equals the spread
    e.p_m = 2;
    CHECK(mu_3_star(e) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("negative discriminant guard") {
    // unreachable with k > 0: the discriminant is (A-B)^2 + mu k (2A + 2B + mu k)
    // with A = mu d, B = (1-mu)(p_m + k' - k); a negative k exercises it
    auto p = demo_params(0.5, 0.5);
    p.k = -1;
    try {
        h_1_star(p);
        FAIL("expected UndefinedThreshold");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::UndefinedThreshold);
    }
    std::mt19937_64 rng(45);
    for (int i = 0; i < 2000; ++i) CHECK_NOTHROW(h_1_star(sample_params(Model::base, rng)));
}

TEST_CASE("profit along mu first rises then falls") {
    auto cells = monotonicity_report(demo_params(0.3, 0.5), "mu", 101);
    REQUIRE(cells.size() == 101);
    bool falling = false;
    int jumps = 0;
    for (size_t i = 0; i + 1 < cells.size(); ++i) {
        if (cells[i].jump) ++jumps;
        if (cells[i].d_profit < 0) falling = true;
        if (falling) REQUIRE(cells[i].d_profit <= 0);
    }
    CHECK(falling);
    CHECK(jumps == 1);
}

TEST_CASE("welfare falls with h on the low-mu anomaly region") {
    auto p = demo_params(0.5, 0.2);
    double hmax = std::min(h_1_star(p), h_2_star(p));
    auto cells = monotonicity_report(p, "h", 99);
    int checked = 0;
    for (size_t i = 0; i + 1 < cells.size(); ++i) {
        if (cells[i + 1].x > hmax) break;
        REQUIRE(cells[i].d_welfare < 0);
        ++checked;
    }
    CHECK(checked > 10);
}

TEST_CASE("smallest monotonicity grid") {
    auto cells = monotonicity_report(demo_params(), "mu", 3);
    CHECK(cells.size() == 3);
    CHECK_THROWS_AS(monotonicity_report(demo_params(), "mu", 2), Error);
    CHECK_THROWS_AS(monotonicity_report(demo_params(), "k", 5), Error);
}

TEST_CASE("closed forms agree with simulation") {
    // 20 points per regime at 10^6 consumers; a 3 SE band holds for each
    // point with probability ~0.997, so the pass bar is 95% of checks
    std::mt19937_64 rng(44);
    int count[3] = {0, 0, 0}, inside = 0, total = 0;
    for (int i = 0; i < 5000 && (count[0] < 20 || count[1] < 20 || count[2] < 20); ++i) {
        auto p = sample_params(Model::base, rng);
        auto eq = classify_equilibrium(p);
        int r = eq.regime == Regime::FOFU ? 0 : eq.regime == Regime::POFU ? 1 : eq.regime == Regime::FOPU ? 2 : -1;
        if (r < 0 || count[r] >= 20) continue;
        ++count[r];
        auto s = oracle::simulate_market(Model::base, p, eq.expert, eq.consumer, 1000000, 1000 + i, 4);
        REQUIRE(s.profit_se.has_value());
        inside += std::abs(s.profit_mean - expert_profit(p, eq)) <= 3 * *s.profit_se;
        inside += std::abs(s.welfare_mean - consumer_welfare(p, eq)) <= 3 * *s.welfare_se;
        total += 2;
    }
    CHECK(count[0] == 20);
    CHECK(count[1] == 20);
    CHECK(count[2] == 20);
    CHECK(inside >= 0.95 * total);
    MESSAGE(inside << "/" << total << " within 3 SE");
}
