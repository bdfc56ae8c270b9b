#include "credence/extensions.hpp"

#include <algorithm>
#include <cmath>

#include "credence/payoffs.hpp"
#include "mixing.hpp"

namespace credence {

using detail::Side;

namespace {

EquilibriumProfile start_profile(Model m, const ModelParams& p) {
    validate_params(p);
    EquilibriumProfile eq;
    eq.model = m;
    auto [e2, c2] = period2_strategies(p);
    eq.expert = e2;
    eq.consumer = c2;
    eq.base_thresholds = regime_thresholds(p);
    return eq;
}

double ratio_or_zero(double num, double den) { return num <= 0 ? 0.0 : num / den; }

}  // namespace

// ---------------------------------------------------------------- epsilon

double epsilon_star(const ModelParams& p) {
    const double h = p.h, mu = p.mu, k = p.k, d = p.spread(), x = p.x_return();
    double a = (1 - mu) * k / ((1 - mu) * k + mu * h * (d + k));
    double b = x > 0 ? mu * (1 - h) * (d + k) / (mu * (1 - h) * (d + k) + (1 - mu) * x) : 1.0;
    return std::min(a, b);
}

EpsilonThresholds epsilon_thresholds(const ModelParams& p) {
    const double h = p.h, e = p.epsilon.value_or(0), k = p.k, kr = p.k_return;
    const double pm = p.p_m, ps = p.p_s, lm = p.l_m, ls = p.l_s, d = p.spread();
    const double A = (1 - e) * h + e * (1 - h), B = e * h + (1 - e) * (1 - h);
    EpsilonThresholds t;
    double n1 = B * ((1 - h * e) * (pm + kr - k) - h * e * (ls + k - ps - kr));
    t.mu_1 = ratio_or_zero(n1, n1 + A * ((d + k) * (1 - h + h * e) + h * (1 - e) * k));
    if (h <= k / (d * (1 - e))) {
        t.mu_2 = 1;
    } else {
        double n2 = A * (k + h * e * (ls + pm - ps));
        t.mu_2 = n2 / (n2 + B * (h * d * (1 - e) - k));
    }
    double n3 = B * ((pm + kr) - h * e * (ls - ps) - k);
    t.mu_3 = ratio_or_zero(n3, n3 + A * ((d + k) * (1 - h + h * e) + h * (1 - e) * (lm - pm + k)));
    t.epsilon_star = epsilon_star(p);
    return t;
}

EquilibriumProfile epsilon_equilibrium(const ModelParams& p, double tol) {
    EquilibriumProfile eq = start_profile(Model::epsilon, p);
    const double eps = p.epsilon.value_or(0);
    auto th = epsilon_thresholds(p);
    eq.thresholds = {{"mu_eps_1", th.mu_1}, {"mu_eps_2", th.mu_2}, {"mu_eps_3", th.mu_3},
                     {"epsilon_star", th.epsilon_star}};
    if (eps >= th.epsilon_star)
        throw Error(ErrorKind::EpsilonTooLarge,
                    "epsilon = " + std::to_string(eps) + " >= epsilon_star = " + std::to_string(th.epsilon_star));
    eq.discrepancies.push_back({"epsilon_star",
                                "statement uses (p_s-p_m+k) where one proof step has (p_s-p_m-k); statement form used"});
    eq.notes.push_back("expert incentive constraints take the diagnosis as the true problem");

    const double mm = p.margin_m(), ms = p.margin_s();
    auto pofu = [&](EquilibriumProfile& q, bool strict) {
        ExpertStrategy e = q.expert;
        e.t_s1 = 0;
        ConsumerStrategy c = q.consumer;
        c.a_m1 = 1;
        c.a_s1 = mm / ms;
        auto r = detail::consumer_root(Model::epsilon, p, e, c, &ExpertStrategy::t_m1, oracle::kSerious);
        if (!r) return false;
        e.t_m1 = *r;
        if (strict && detail::accept_margin(Model::epsilon, p, e, c, oracle::kMinor) <= 0) return false;
        detail::set_pattern(q, Regime::POFU, *r, 0, 1, mm / ms);
        q.requires_oracle = true;
        return true;
    };
    auto fopu = [&](EquilibriumProfile& q, bool strict) {
        ExpertStrategy e = q.expert;
        e.t_m1 = 0;
        ConsumerStrategy c = q.consumer;
        c.a_m1 = ms / (ms + mm);
        c.a_s1 = 1;
        auto r = detail::consumer_root(Model::epsilon, p, e, c, &ExpertStrategy::t_s1, oracle::kMinor);
        if (!r) return false;
        e.t_s1 = *r;
        if (strict && detail::accept_margin(Model::epsilon, p, e, c, oracle::kSerious) <= 0) return false;
        detail::set_pattern(q, Regime::FOPU, 0, *r, ms / (ms + mm), 1);
        q.consumer.a_m2 = detail::settle_a_m2(Model::epsilon, p, q.expert, q.consumer);
        q.requires_oracle = true;
        return true;
    };
    Side side = detail::band_side(p.mu, std::max(th.mu_1, th.mu_3), th.mu_2, tol, eq.boundary_flag);
    detail::resolve_band(eq, p, side, pofu, fopu);
    return eq;
}

EpsilonEffect epsilon_error_rate_effect(const ModelParams& p, double step, double tol) {
    ModelParams a = p, b = p;
    a.epsilon = 0;
    b.epsilon = step;
    auto ta = epsilon_thresholds(a), tb = epsilon_thresholds(b);
    EpsilonEffect r;
    r.d_mu_1 = (tb.mu_1 - ta.mu_1) / step;
    r.d_mu_2 = (tb.mu_2 - ta.mu_2) / step;
    r.sign_mu_1 = sign_label(r.d_mu_1, tol);
    r.sign_mu_2 = sign_label(r.d_mu_2, tol);
    return r;
}

// ---------------------------------------------------------------- capacity

CapacityThresholds capacity_thresholds(const ModelParams& p) {
    const double h = p.h, c = p.chi.value_or(0), k = p.k, kr = p.k_return;
    const double pm = p.p_m, ps = p.p_s, lm = p.l_m, ls = p.l_s, d = p.spread(), x = p.x_return();
    const double w = h + (1 - h) * c;  // honest or shocked: truthful minor
    CapacityThresholds t;
    t.chi_star = p.margin_m() / p.margin_s();

    double n1 = (1 - h) * (kr - k) + (1 - h) * (h + (1 - h) * (1 - c)) * pm;
    t.mu[0] = ratio_or_zero(n1, n1 + w * (1 - h) * (1 - c) * d + w * k);

    if (k >= w * d) {
        t.mu[1] = 1;
    } else {
        double ha = h * k + h * c * (ls - ps) + h * c * (1 - h) * pm;
        t.mu[1] = ha / (ha - (1 - h) * k + (1 - h) * w * d);
    }

    double n3 = x * (1 - h);
    t.mu[2] = ratio_or_zero(n3, n3 + w * k + w * w * (lm - pm) + w * (1 - h) * (1 - c) * d);

    double n4 = k + h * c * (ls - ps) + (1 - h) * c * (ls - ps + pm);
    double d4 = h * k + h * c * (ls - ps) + (1 - h) * c * (ls - ps + pm) + (1 - h) * w * d;
    t.mu[3] = std::min(1.0, n4 / d4);

    double y1 = x - c * (1 - h) * pm;
    double x1 = k + (1 - h) * (1 - c) * d;
    double b = (1 - h) * c;
    t.mu[4] = y1 <= 0 ? 0.0 : b * y1 / (w * x1 + b * y1);

    double n6 = (1 - h) * c * x;
    t.mu[5] = ratio_or_zero(n6, (1 - h) * c * (pm + kr) + h * k + w * (1 - h) * (1 - c) * d + w * w * (lm - pm));
    return t;
}

namespace {

// Posterior at which the first-visit consumer is indifferent: the
// acceptance advantage is A at tau = 1 and B at tau = 0.
double tau_root(double a, double b) { return -b / (a - b); }

}  // namespace

EquilibriumProfile capacity_equilibrium(const ModelParams& p, double tol) {
    EquilibriumProfile eq = start_profile(Model::capacity, p);
    auto th = capacity_thresholds(p);
    eq.thresholds = {{"chi_star", th.chi_star}};
    for (int i = 0; i < 6; ++i) eq.thresholds.push_back({"mu_chi_" + std::to_string(i + 1), th.mu[i]});
    eq.discrepancies.push_back({"mu_chi_2", "printed form does not solve its defining indifference; derived form used"});
    eq.discrepancies.push_back({"mu_chi_5", "printed form does not solve its defining indifference; derived form used"});
    eq.discrepancies.push_back({"chi_star", "printed with c_S; read as c_s"});

    const double h = p.h, mu = p.mu, c = p.chi.value_or(0), k = p.k, kr = p.k_return;
    const double pm = p.p_m, ps = p.p_s, lm = p.l_m, ls = p.l_s, d = p.spread(), x = p.x_return();
    const double w = h + (1 - h) * c, mm = p.margin_m(), ms = p.margin_s();

    auto pofu_t = [&]() {
        double tau = tau_root(k + c * (ls - ps) + c * (1 - h) * pm, k - w * d);
        return 1 - (1 - mu) * h * (1 - tau) / (mu * tau * (1 - h));
    };
    auto pofu = [&](EquilibriumProfile& q, bool strict) {
        double t = pofu_t();
        if (!(t > 0 && t < 1)) return false;
        detail::set_pattern(q, Regime::POFU, t, 0, 1, mm / ms);
        if (strict && detail::accept_margin(Model::capacity, p, q.expert, q.consumer, oracle::kMinor) <= 0)
            return false;
        return true;
    };
    auto fopu = [&](EquilibriumProfile& q, bool strict) {
        double t_rma = tau_root(k + (1 - h) * (1 - c) * d, -(x - c * (1 - h) * pm));
        double t_rmr = tau_root(k + d + w * (lm - ps), k - kr - pm);
        double tau = std::max(t_rma, t_rmr);
        double n = mu * w;
        double one_minus = (n * (1 - tau) / tau / ((1 - mu) * (1 - h)) - c) / (1 - c);
        double t = 1 - one_minus;
        if (!(t > 0 && t < 1)) return false;
        detail::set_pattern(q, Regime::FOPU, 0, t, ms / (mm + ms * (1 - c)), 1);
        q.consumer.a_m2 = t_rmr > t_rma ? 0 : 1;
        if (strict && detail::accept_margin(Model::capacity, p, q.expert, q.consumer, oracle::kSerious) <= 0)
            return false;
        return true;
    };

    if (c <= th.chi_star) {
        Side side = detail::band_side(mu, std::max(th.mu[0], th.mu[2]), th.mu[1], tol, eq.boundary_flag);
        detail::resolve_band(eq, p, side, pofu, fopu);
    } else {
        // serious problems are no longer worth undertreating when mu is low
        double lower = std::max(th.mu[4], th.mu[5]), upper = th.mu[3];
        bool near = (upper < 1 && std::abs(mu - upper) <= tol) || (lower > 0 && std::abs(mu - lower) <= tol);
        eq.boundary_flag = near;
        if (near || (mu >= lower && mu <= upper)) {
            detail::set_pattern(eq, Regime::FONU, 0, 1, 1, 1);
        } else if (mu > upper) {
            if (!pofu(eq, false)) detail::mark_none(eq, Status::Uncharacterized);
        } else {
            detail::set_pattern(eq, Regime::PONU, 0, 1, 0, 1);
            eq.consumer.a_m2 = detail::settle_a_m2(Model::capacity, p, eq.expert, eq.consumer);
        }
    }
    eq.extras.push_back({"strategic_undertreatment", eq.regime != Regime::NONE && eq.expert.t_s1 < 1 ? 1.0 : 0.0});
    return eq;
}

// ---------------------------------------------------------------- hidden history

HiddenThresholds hidden_thresholds(const ModelParams& p) {
    const double h = p.h, k = p.k, kr = p.k_return, pm = p.p_m, ps = p.p_s, lm = p.l_m, ls = p.l_s;
    const double d = p.spread(), x = p.x_return();
    HiddenThresholds t;
    if (h <= k / d) {
        t.mu_2 = 1;
    } else {
        double n = h * h * k + h * (1 - h) * (ls - ps + pm + k);
        t.mu_2 = n / (n + (1 - h) * (h * d - k));
    }
    if (h <= (ls - ps + k - kr) / (ls - ps + pm)) {
        t.mu_1 = 0;
    } else {
        double n = (1 - h) * (h * x - (1 - h) * (ls - ps + k - kr));
        t.mu_1 = ratio_or_zero(n, n + h * ((1 - h) * d + k));
    }
    if (h <= (ls - ps - pm + k - kr) / (ls - ps)) {
        t.mu_3 = 0;
    } else {
        double n = (1 - h) * (x - (1 - h) * (ls - ps));
        t.mu_3 = ratio_or_zero(n, n + h * h * (lm - pm + k) + (1 - h) * h * (d + k));
    }
    const double ms = p.margin_s(), mm = p.margin_m();
    t.h_pivot = (ms - 2 * mm) / (ms - mm);
    return t;
}

VisitPosteriors visit_posteriors(const ModelParams& p, const ExpertStrategy& e, const ConsumerStrategy& c) {
    auto [ts, tm] = expected_truthfulness(p, e);
    VisitPosteriors v;
    double back_m_m = tm * (1 - c.a_m1), back_m_s = (1 - tm) * (1 - c.a_s1);
    double back_s_m = (1 - ts) * (1 - c.a_m1), back_s_s = ts * (1 - c.a_s1);
    v.gamma_m = 1 / (1 + back_m_m + back_m_s);
    v.gamma_s = 1 / (1 + back_s_m + back_s_s);
    v.gamma_mm = back_m_m + back_m_s > 0 ? back_m_m / (back_m_m + back_m_s) : 0;
    v.gamma_sm = back_s_m + back_s_s > 0 ? back_s_m / (back_s_m + back_s_s) : 0;
    return v;
}

EquilibriumProfile hidden_history_equilibrium(const ModelParams& p, double tol) {
    EquilibriumProfile eq = start_profile(Model::hidden_history, p);
    auto th = hidden_thresholds(p);
    eq.thresholds = {{"mu_gamma_1", th.mu_1}, {"mu_gamma_2", th.mu_2}, {"mu_gamma_3", th.mu_3},
                     {"h_pivot", th.h_pivot}};
    eq.discrepancies.push_back(
        {"mu_gamma_2", "printed symbol d and condition h <= h/(p_s-p_m) read as k and h <= k/(p_s-p_m)"});
    eq.discrepancies.push_back({"hidden-history mixed acceptances",
                                "printed a_s1 (POFU) and a_m1 (FOPU) weight second visits as if T_bar = h; the "
                                "visit mix at the mixed T_bar is used"});

    const double h = p.h, mm = p.margin_m(), ms = p.margin_s();
    const Model m = Model::hidden_history;
    auto pofu = [&](EquilibriumProfile& q, bool strict) {
        if (h >= p.k / p.spread() && h <= th.h_pivot) {
            // serious recommendations are rejected instead of mixed
            detail::set_pattern(q, Regime::FOFU_RS, 0, 0, 1, 0);
            q.consumer.a_m2 = detail::settle_a_m2(m, p, q.expert, q.consumer);
            return true;
        }
        ConsumerStrategy c = q.consumer;
        c.a_m1 = 1;
        c.a_s1 = 0.5;  // consumer values do not depend on a_s1 here
        ExpertStrategy e = q.expert;
        e.t_s1 = 0;
        auto r = detail::consumer_root(m, p, e, c, &ExpertStrategy::t_m1, oracle::kSerious);
        if (!r) return false;
        // returning minor consumers were told "serious" by a fraudulent expert
        double u = (1 - h) * (1 - *r);
        double a = (mm * (1 + u) - u * ms) / (ms * (1 - u) + u * mm);
        if (!(a > 0 && a < 1)) return false;
        detail::set_pattern(q, Regime::POFU, *r, 0, 1, a);
        q.requires_oracle = true;
        if (strict && detail::accept_margin(m, p, q.expert, q.consumer, oracle::kMinor) <= 0) return false;
        return true;
    };
    auto fopu = [&](EquilibriumProfile& q, bool strict) {
        ExpertStrategy e = q.expert;
        e.t_m1 = 0;
        ConsumerStrategy c = q.consumer;
        c.a_m1 = 0.5;  // any interior value: the minor rejection must be on path
        c.a_s1 = 1;
        auto r = detail::consumer_root(m, p, e, c, &ExpertStrategy::t_s1, oracle::kMinor);
        if (!r) return false;
        e.t_s1 = *r;
        bool rmr = detail::reject_plan_binds(m, p, e, c, oracle::kMinor);
        double v = (1 - h) * (1 - *r), x = rmr ? 0.0 : 1.0;
        double a = (ms * (1 + v) - v * x * mm) / (mm + ms * (1 + v) - v * x * mm);
        detail::set_pattern(q, Regime::FOPU, 0, *r, a, 1);
        q.consumer.a_m2 = rmr ? 0 : 1;
        q.requires_oracle = true;
        if (strict && detail::accept_margin(m, p, q.expert, q.consumer, oracle::kSerious) <= 0) return false;
        return true;
    };
    Side side = detail::band_side(p.mu, std::max(th.mu_1, th.mu_3), th.mu_2, tol, eq.boundary_flag);
    detail::resolve_band(eq, p, side, pofu, fopu);
    if (eq.regime != Regime::NONE) {
        auto v = visit_posteriors(p, eq.expert, eq.consumer);
        eq.extras = {{"gamma_m", v.gamma_m}, {"gamma_s", v.gamma_s}, {"gamma_mm", v.gamma_mm},
                     {"gamma_sm", v.gamma_sm}};
    }
    return eq;
}

}  // namespace credence
