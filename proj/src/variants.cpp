#include "credence/variants.hpp"

#include <algorithm>
#include <cmath>

#include "credence/numerics.hpp"
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

// k / (hk + (1-h)h(p_s-p_m)), capped at 1; the FONU ceiling shared by
// several variants.
double fonu_ceiling(const ModelParams& p) {
    const double h = p.h, k = p.k, d = p.spread();
    return std::min(1.0, k / (h * k + (1 - h) * h * d));
}

}  // namespace

// ---------------------------------------------------------------- alternative contract

double alt_contract_threshold(const ModelParams& p) { return fonu_ceiling(p); }

EquilibriumProfile alternative_contract_equilibrium(const ModelParams& p, double tol) {
    EquilibriumProfile eq = start_profile(Model::alt_contract, p);
    const double h = p.h, mu = p.mu, k = p.k, d = p.spread(), mm = p.margin_m(), ms = p.margin_s();
    const double bound = alt_contract_threshold(p);
    eq.thresholds = {{"mu_alt", bound}};
    eq.discrepancies.push_back(
        {"alt_contract t_m1", "printed mixing probability omits the h factor in the numerator; derived form used"});
    eq.discrepancies.push_back(
        {"alt_contract a_s1", "summary labels do not match the derivation for the t_s1 = 1 regimes; derivation used"});

    eq.boundary_flag = bound < 1 && std::abs(mu - bound) <= tol;
    if (mu <= bound || eq.boundary_flag) {
        detail::set_pattern(eq, Regime::FONU, 0, 1, 1, 1);
        return eq;
    }
    if (d > p.c_s) {
        detail::set_pattern(eq, Regime::POFU, base_pofu_t_m1(p), 0, 1, mm / ms);
    } else {
        double t = 1 - (1 - mu) * k / (mu * (1 - h) * (h * d - k));
        detail::set_pattern(eq, Regime::MONU, t, 1, 1, mm / ms);
    }
    return eq;
}

// ---------------------------------------------------------------- delayed discovery

DeltaThresholds delta_thresholds(const ModelParams& p) {
    const double h = p.h, k = p.k, kr = p.k_return, d = p.spread(), dl = p.delta.value_or(0);
    const double pm = p.p_m, ps = p.p_s, ls = p.l_s;
    DeltaThresholds t;
    t.pivot = p.margin_m() / p.margin_s();
    double xd = (1 - dl) * p.x_return() + dl * (ls - ps + pm - k);
    t.mu_1 = xd <= 0 ? 0.0 : (1 - h) * xd / ((1 - h) * xd + h * k + h * (1 - h) * d);
    double np = (1 - h) * (1 - dl) * (pm - kr + k) + (1 - h) * dl * (ls - ps + pm - k);
    t.mu_1_printed = np / (h * k + (1 - h) * d + np);
    t.mu_2 = regime_thresholds(p).mu_2_star;
    t.mu_3 = fonu_ceiling(p);
    return t;
}

EquilibriumProfile delayed_discovery_equilibrium(const ModelParams& p, double tol) {
    EquilibriumProfile eq = start_profile(Model::delta, p);
    auto th = delta_thresholds(p);
    eq.thresholds = {{"delta_pivot", th.pivot}, {"mu_delta_1", th.mu_1}, {"mu_delta_2", th.mu_2},
                     {"mu_delta_3", th.mu_3}};
    eq.discrepancies.push_back({"mu_delta_1", "printed form has (p_m-k'+k) and no h on (p_s-p_m); printed value " +
                                                  std::to_string(th.mu_1_printed) + ", derived value used"});
    eq.discrepancies.push_back(
        {"delta payoff tree", "appendix payoff swaps delta and 1-delta against the prose; prose used"});

    const double h = p.h, mu = p.mu, k = p.k, d = p.spread(), dl = p.delta.value_or(0);
    const double mm = p.margin_m(), ms = p.margin_s();
    auto pofu = [&](EquilibriumProfile& q, bool strict) {
        double t = base_pofu_t_m1(p);
        if (!(t > 0 && t < 1)) return false;
        detail::set_pattern(q, Regime::POFU, t, 0, 1, mm / ms);
        return !strict || detail::accept_margin(Model::delta, p, q.expert, q.consumer, oracle::kMinor) > 0;
    };

    if (dl > th.pivot) {
        eq.boundary_flag = th.mu_3 < 1 && std::abs(mu - th.mu_3) <= tol;
        if (mu <= th.mu_3 || eq.boundary_flag) {
            detail::set_pattern(eq, Regime::FONU, 0, 1, 1, 1);
        } else if (!pofu(eq, true)) {
            detail::mark_none(eq, Status::Uncharacterized);
            eq.discrepancies.push_back(
                {"delta regime map", "POFU listed here but minor recommendations are not accepted at its beliefs"});
        }
        return eq;
    }
    const double xd = (1 - dl) * p.x_return() + dl * (p.l_s - p.p_s + p.p_m - k);
    auto fopu = [&](EquilibriumProfile& q, bool strict) {
        if (xd <= 0) return false;
        double tbar = 1 - mu * h * ((1 - h) * d + k) / ((1 - mu) * xd);
        double t = (tbar - h) / (1 - h);
        if (!(t > 0 && t < 1)) return false;
        detail::set_pattern(q, Regime::FOPU, 0, t, ms / (mm + (1 - dl) * ms), 1);
        return !strict || detail::accept_margin(Model::delta, p, q.expert, q.consumer, oracle::kSerious) > 0;
    };
    Side side = detail::band_side(mu, th.mu_1, th.mu_2, tol, eq.boundary_flag);
    detail::resolve_band(eq, p, side, pofu, fopu);
    return eq;
}

// ---------------------------------------------------------------- resentment

double resentment_threshold(const ModelParams& p) { return fonu_ceiling(p); }

namespace {

struct ResentmentPayoffs {
    double sa, srma, srmr, ma, mrma, mrmr;
};

// First-visit consumer payoffs with hidden history, given expected
// truthfulness; undertreated consumers search instead of returning.
ResentmentPayoffs resentment_payoffs(const ModelParams& p, double ts, double tm) {
    const double mu = p.mu, k = p.k, pm = p.p_m, ps = p.p_s, lm = p.l_m, ls = p.l_s;
    const double tau_s = (1 - mu) * ts / ((1 - mu) * ts + mu * (1 - tm));
    const double tau_m = mu * tm / (mu * tm + (1 - mu) * (1 - ts));
    ResentmentPayoffs r;
    r.sa = -ps;
    r.srma = -tau_s * ts * (ps + k) - tau_s * (1 - ts) * (ls + pm + k) - (1 - tau_s) * tm * (pm + k) -
             (1 - tau_s) * (1 - tm) * (ps + k);
    r.srmr = -tau_s * ts * (ps + k) - tau_s * (1 - ts) * (ls + k) - (1 - tau_s) * tm * (lm + k) -
             (1 - tau_s) * (1 - tm) * (ps + k);
    r.ma = -tau_m * pm - (1 - tau_m) * (pm + ps + k);
    r.mrma = -tau_m * tm * (pm + k) - tau_m * (1 - tm) * (ps + k) - (1 - tau_m) * ts * (ps + k) -
             (1 - tau_m) * (1 - ts) * (pm + ls + k);
    r.mrmr = -tau_m * tm * (lm + k) - tau_m * (1 - tm) * (ps + k) - (1 - tau_m) * ts * (ps + k) -
             (1 - tau_m) * (1 - ts) * (ls + k);
    return r;
}

// One mixed family: the free expectation solves sa = srma on (h, 1), the
// acceptance makes the other expert constraint bind.
bool resentment_family(const ModelParams& p, int family, EquilibriumProfile& eq) {
    const double h = p.h, mm = p.margin_m(), ms = p.margin_s();
    auto f = [&](double x) {
        auto r = family == 1 ? resentment_payoffs(p, x, h) : resentment_payoffs(p, h, x);
        return r.sa - r.srma;
    };
    for (double x : num::scan_roots(f, h + kDefaultTol, 1 - kDefaultTol, 64)) {
        double ts = family == 1 ? x : h, tm = family == 1 ? h : x;
        double a;
        if (family == 1) {
            a = (mm * (1 + ts) - ts * ms) / (ms * (1 - ts) + ts * mm);
        } else {
            double u = 1 - tm;
            a = (mm * (1 + u) - u * ms) / (ms * (1 - u) + u * mm);
        }
        if (!(a > 0 && a < 1)) continue;
        double exc = (a + (1 - a) * (1 - tm)) * ms - (1 + (1 - a) * (1 - tm)) * mm;
        double ina = (1 + (1 - a) * ts) * mm - (a + (1 - a) * ts) * ms;
        auto r = resentment_payoffs(p, ts, tm);
        if (exc < -1e-12 || ina < -1e-12 || !(r.ma > std::max(r.mrma, r.mrmr)) || !(r.sa >= r.srmr)) continue;
        if (family == 1)
            detail::set_pattern(eq, Regime::FOPU_MS, 0, (ts - h) / (1 - h), 1, a);
        else
            detail::set_pattern(eq, Regime::POFU, (tm - h) / (1 - h), 0, 1, a);
        eq.requires_oracle = true;
        return true;
    }
    return false;
}

}  // namespace

EquilibriumProfile resentment_equilibrium(const ModelParams& p, double tol) {
    if (p.k_return <= p.k) throw Error(ErrorKind::NotResentment, "k_return <= k");
    ModelParams q = p;
    q.resentment = true;
    EquilibriumProfile eq = start_profile(Model::resentment, q);
    const double h = q.h, mu = q.mu, k = q.k, d = q.spread(), mm = q.margin_m(), ms = q.margin_s();
    const double bound = resentment_threshold(q);
    eq.thresholds = {{"mu_r_0", bound}};

    if (!q.hidden_history) {
        eq.boundary_flag = bound < 1 && std::abs(mu - bound) <= tol;
        if (mu <= bound || eq.boundary_flag) {
            detail::set_pattern(eq, Regime::FONU, 0, 1, 1, 1);
        } else {
            double tbar = 1 - (1 - mu) * k / (mu * (h * d - k));
            detail::set_pattern(eq, Regime::MONU, (tbar - h) / (1 - h), 1, 1, mm / ms);
        }
        return eq;
    }

    eq.discrepancies.push_back({"mu_r_1..mu_r_4",
                                "printed windows do not match the roots of the stated indifference conditions; "
                                "families located by root search instead"});
    eq.notes.push_back("mixing roots searched on (h, 1)");
    if (resentment_family(q, 1, eq) || resentment_family(q, 2, eq)) return eq;
    if (mu <= bound) {
        detail::set_pattern(eq, Regime::FONU, 0, 1, 1, 1);
        eq.notes.push_back("no mixed family at this point; FONU under the known-history bound");
        return eq;
    }
    detail::mark_none(eq, Status::Uncharacterized);
    return eq;
}

// ---------------------------------------------------------------- heterogeneity

AlphaThresholds alpha_thresholds(const ModelParams& p) {
    const double h = p.h, a = p.alpha.value_or(1), k = p.k, kr = p.k_return;
    const double pm = p.p_m, ps = p.p_s, lm = p.l_m, ls = p.l_s, d = p.spread();
    const double w = h + (1 - h) * (1 - a);  // truthful share behind a minor recommendation
    AlphaThresholds t;
    t.pivot = (k - kr) / (ls - ps);
    double n1 = (1 - h) * (1 - a) * (a + h * (1 - a)) * pm;
    t.mu_1 = n1 / (n1 + w * (w * k + (1 - h) * a * (ps + k - pm)));
    double n3 = (1 - h) * (1 - a) * pm;
    t.mu_3 = n3 / (n3 + w * (w * (lm + k - pm) + (1 - h) * a * (ps + k - pm)));
    if (k >= w * d) {
        t.mu_2 = 1;
    } else {
        double n2 = k + (1 - a) * (ls - ps) + (1 - h) * (1 - a) * pm;
        t.mu_2 = n2 / (n2 + (1 - h) * (w * d - k));
    }
    return t;
}

double tau_h(double alpha, double t_s1) {
    double n = alpha * (1 - t_s1);
    return n / ((1 - alpha) + n);
}

EquilibriumProfile heterogeneous_capability_equilibrium(const ModelParams& p, double tol) {
    EquilibriumProfile eq = start_profile(Model::heterogeneity, p);
    auto th = alpha_thresholds(p);
    eq.thresholds = {{"alpha_pivot", th.pivot}, {"mu_alpha_1", th.mu_1}, {"mu_alpha_2", th.mu_2},
                     {"mu_alpha_3", th.mu_3}};
    eq.discrepancies.push_back({"mu_alpha_2", "printed form does not solve its defining indifference; derived form used"});
    eq.discrepancies.push_back(
        {"heterogeneity beliefs", "posteriors printed in base-model form; beliefs enumerated over capability types"});
    const double a = p.alpha.value_or(1), mu = p.mu;
    if (a <= th.pivot) {
        detail::mark_none(eq, Status::Uncharacterized);
        eq.notes.push_back("alpha at or below the capability pivot: undertreated consumers return");
        return eq;
    }
    double lower = std::max(th.mu_1, th.mu_3), upper = th.mu_2;
    eq.boundary_flag = (upper < 1 && std::abs(mu - upper) <= tol) || std::abs(mu - lower) <= tol;
    if (mu > upper + tol) {
        detail::mark_none(eq, Status::Uncharacterized);
        return eq;
    }
    if (mu >= lower - tol) {
        detail::set_pattern(eq, Regime::FONU, 0, 1, 1, 1);
    } else {
        detail::set_pattern(eq, Regime::PONU, 0, 1, 0, 1);
        eq.consumer.a_m2 = detail::settle_a_m2(Model::heterogeneity, p, eq.expert, eq.consumer);
    }
    eq.extras = {{"tau_h", tau_h(a, eq.expert.t_s1)}};
    return eq;
}

// ---------------------------------------------------------------- endogenous price

PriceQuote endogenous_prices(const ModelParams& p) { return {p.l_m, p.l_m - p.c_m + p.c_s}; }

double endogenous_mu_bound(const ModelParams& p) { return 1 - p.k / (p.l_m + p.k_return); }

EquilibriumProfile endogenous_price_equilibrium(const ModelParams& p, double) {
    EquilibriumProfile eq = start_profile(Model::endogenous_price, p);
    auto q = endogenous_prices(p);
    const double bound = endogenous_mu_bound(p);
    eq.thresholds = {{"mu_bound", bound}};
    eq.extras = {{"p_m_star", q.p_m_star}, {"p_s_star", q.p_s_star}};
    eq.discrepancies.push_back(
        {"endogenous price region",
         "the profile also needs l_s > p_s* + p_m* + k_return, else a consumer quits on a minor recommendation"});
    bool keeps = p.l_s > q.p_s_star + q.p_m_star + p.k_return;
    if (p.mu > bound && keeps) {
        detail::set_pattern(eq, Regime::NOFU, 1, 0, 1, 1);
        eq.expert.t_m2 = 1;
        eq.expert.t_s2 = 1;
    } else {
        detail::mark_none(eq, Status::NoPureEquilibrium);
    }
    return eq;
}

}  // namespace credence
