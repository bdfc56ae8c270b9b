#include "credence/equilibrium.hpp"

#include <cmath>
#include <limits>

#include "credence/params_io.hpp"
#include "credence/payoffs.hpp"

namespace credence {

std::string_view regime_name(Regime r) {
    switch (r) {
        case Regime::FOFU: return "FOFU";
        case Regime::POFU: return "POFU";
        case Regime::FOPU: return "FOPU";
        case Regime::FONU: return "FONU";
        case Regime::PONU: return "PONU";
        case Regime::MONU: return "MONU";
        case Regime::FOFU_RS: return "FOFU_RS";
        case Regime::FOPU_MS: return "FOPU_MS";
        case Regime::NOFU: return "NOFU";
        case Regime::OTHER: return "OTHER";
        case Regime::NONE: return "NONE";
    }
    return "?";
}

std::string_view status_name(Status s) {
    switch (s) {
        case Status::Ok: return "ok";
        case Status::NoDecisiveEquilibrium: return "NoDecisiveEquilibrium";
        case Status::NoPureEquilibrium: return "NoPureEquilibrium";
        case Status::Uncharacterized: return "Uncharacterized";
    }
    return "?";
}

namespace {
double find_named(const std::vector<Threshold>& v, std::string_view name) {
    for (auto& t : v)
        if (t.name == name) return t.value;
    return std::numeric_limits<double>::quiet_NaN();
}
}  // namespace

double EquilibriumProfile::threshold(std::string_view name) const { return find_named(thresholds, name); }
double EquilibriumProfile::extra(std::string_view name) const { return find_named(extras, name); }

Regime regime_of(const ExpertStrategy& e, const ConsumerStrategy& c, double tol) {
    // 0, 1 or 2 (mixed)
    auto cls = [tol](double x) { return x <= tol ? 0 : (x >= 1 - tol ? 1 : 2); };
    int tm = cls(e.t_m1), ts = cls(e.t_s1), am = cls(c.a_m1), as = cls(c.a_s1);
    auto is = [&](int a, int b, int c2, int d) { return tm == a && ts == b && am == c2 && as == d; };
    if (is(0, 0, 1, 1)) return Regime::FOFU;
    if (is(2, 0, 1, 2)) return Regime::POFU;
    if (is(0, 2, 2, 1)) return Regime::FOPU;
    if (is(0, 1, 1, 1)) return Regime::FONU;
    if (is(0, 1, 0, 1)) return Regime::PONU;
    if (is(2, 1, 1, 2)) return Regime::MONU;
    if (is(0, 0, 1, 0)) return Regime::FOFU_RS;
    if (is(0, 2, 1, 2)) return Regime::FOPU_MS;
    if (is(1, 0, 1, 1)) return Regime::NOFU;
    return Regime::OTHER;
}

RegimeThresholds regime_thresholds(const ModelParams& p) {
    RegimeThresholds t;
    const double h = p.h, k = p.k, d = p.spread(), x = p.x_return();
    if (x <= 0) {
        t.empty_fopu = true;
        t.mu_1_star = 0;
    } else {
        t.mu_1_star = (1 - h) * x / (h * k + (1 - h) * h * d + (1 - h) * x);
    }
    if (h <= k / d) {
        t.h_below_pivot = true;
        t.mu_2_star = 1;
    } else {
        t.mu_2_star = h * k / (h * k + (1 - h) * h * d - (1 - h) * k);
    }
    return t;
}

double base_pofu_t_m1(const ModelParams& p) {
    const double h = p.h, k = p.k, d = p.spread(), mu = p.mu;
    return 1 - (1 - mu) * h * k / (mu * (1 - h) * (h * d - k));
}

double base_fopu_t_s1(const ModelParams& p) {
    const double h = p.h, k = p.k, d = p.spread(), mu = p.mu;
    return 1 - mu * h * ((1 - h) * d + k) / ((1 - mu) * (1 - h) * p.x_return());
}

bool base_pofu_exists(const ModelParams& p) {
    if (p.h * p.spread() <= p.k) return false;
    double t = base_pofu_t_m1(p);
    if (!(t > 0 && t < 1)) return false;
    ExpertStrategy e;
    e.t_m1 = t;
    Beliefs b = posterior_beliefs(p, e);
    // minor recommendations must be strictly accepted
    return b.tau_m * ((1 - p.h) * p.spread() + p.k) > (1 - b.tau_m) * p.x_return();
}

bool base_fopu_exists(const ModelParams& p) {
    if (p.x_return() <= 0) return false;
    double t = base_fopu_t_s1(p);
    if (!(t > 0 && t < 1)) return false;
    ExpertStrategy e;
    e.t_s1 = t;
    Beliefs b = posterior_beliefs(p, e);
    return p.k > (1 - b.tau_s) * p.h * p.spread();
}

namespace {

void set_pofu(const ModelParams& p, EquilibriumProfile& eq) {
    eq.regime = Regime::POFU;
    eq.expert.t_m1 = base_pofu_t_m1(p);
    eq.expert.t_s1 = 0;
    eq.consumer.a_m1 = 1;
    eq.consumer.a_s1 = p.margin_m() / p.margin_s();
}

void set_fopu(const ModelParams& p, EquilibriumProfile& eq) {
    eq.regime = Regime::FOPU;
    eq.expert.t_m1 = 0;
    eq.expert.t_s1 = base_fopu_t_s1(p);
    eq.consumer.a_m1 = p.margin_s() / (p.margin_s() + p.margin_m());
    eq.consumer.a_s1 = 1;
}

void set_fofu(EquilibriumProfile& eq) {
    eq.regime = Regime::FOFU;
    eq.expert.t_m1 = 0;
    eq.expert.t_s1 = 0;
    eq.consumer.a_m1 = 1;
    eq.consumer.a_s1 = 1;
}

}  // namespace

EquilibriumProfile classify_equilibrium(const ModelParams& p, double tol) {
    validate_params(p);
    return_decision(p);
    EquilibriumProfile eq;
    eq.model = Model::base;
    auto [e2, c2] = period2_strategies(p);
    eq.expert = e2;
    eq.consumer = c2;
    eq.base_thresholds = regime_thresholds(p);
    const auto& th = eq.base_thresholds;
    eq.thresholds = {{"mu_1_star", th.mu_1_star}, {"mu_2_star", th.mu_2_star}};
    if (th.empty_fopu) eq.notes.push_back("EmptyFOPURegion: p_m + k_return - k <= 0, mu_1_star clamped to 0");

    const double mu = p.mu;
    bool near1 = !th.empty_fopu && std::abs(mu - th.mu_1_star) <= tol;
    bool near2 = !th.h_below_pivot && std::abs(mu - th.mu_2_star) <= tol;

    if (th.mu_1_star <= th.mu_2_star) {
        if (near1 || near2) {
            set_fofu(eq);
            eq.boundary_flag = true;
            eq.notes.push_back("BoundaryAmbiguity: mu within TOL of a threshold, FOFU side returned");
        } else if (mu < th.mu_1_star) {
            set_fopu(p, eq);
        } else if (mu > th.mu_2_star) {
            set_pofu(p, eq);
        } else {
            set_fofu(eq);
        }
        return eq;
    }

    // Overlap: no FOFU band. Each mixed regime is kept only where it exists.
    eq.boundary_flag = near1 || near2;
    bool pofu = mu > th.mu_2_star && base_pofu_exists(p);
    bool fopu = mu < th.mu_1_star && base_fopu_exists(p);
    if (pofu && fopu) {
        if (mu > p.margin_m() / p.margin_s())
            set_pofu(p, eq);
        else
            set_fopu(p, eq);
        eq.notes.push_back("overlap: tie broken by mu against (p_m-c_m)/(p_s-c_s)");
        eq.discrepancies.push_back(
            {"overlap tie-break",
             "Pi_POFU - Pi_FOPU = (p_m-c_m) - mu(p_s-c_s), so the printed rule picks the regime with "
             "the lower expert profit; applied as printed"});
    } else if (pofu) {
        set_pofu(p, eq);
    } else if (fopu) {
        set_fopu(p, eq);
    } else {
        eq.regime = Regime::NONE;
        eq.status = Status::NoDecisiveEquilibrium;
        eq.discrepancies.push_back(
            {"overlap regime map",
             "mu_2_star < mu_1_star and neither POFU nor FOPU exists at this point"});
    }
    return eq;
}

Sensitivity comparative_statics(const ModelParams& p, const std::string& target, double step) {
    if (step == 0) throw Error(ErrorKind::DegenerateStep, "step must be nonzero");
    if (target != "k" && target != "p_s") throw Error(ErrorKind::BadArgument, "target must be k or p_s");
    ModelParams lo = p, hi = p;
    set_field(lo, target, get_field(p, target) - step);
    set_field(hi, target, get_field(p, target) + step);
    auto eq0 = classify_equilibrium(p);
    auto eql = classify_equilibrium(lo);
    auto eqh = classify_equilibrium(hi);
    if (eql.regime != eq0.regime || eqh.regime != eq0.regime || eql.boundary_flag || eqh.boundary_flag)
        throw Error(ErrorKind::RegimeCrossing, std::string(regime_name(eql.regime)) + " at -step, " +
                                                   std::string(regime_name(eqh.regime)) + " at +step");
    Sensitivity s;
    s.target = target;
    s.step = step;
    s.regime = eq0.regime;
    double w = 2 * step;
    s.d_t_m1 = (eqh.expert.t_m1 - eql.expert.t_m1) / w;
    s.d_t_s1 = (eqh.expert.t_s1 - eql.expert.t_s1) / w;
    s.d_mu_1_star = (eqh.base_thresholds.mu_1_star - eql.base_thresholds.mu_1_star) / w;
    s.d_mu_2_star = (eqh.base_thresholds.mu_2_star - eql.base_thresholds.mu_2_star) / w;
    return s;
}

std::string_view sign_label(double v, double tol) {
    if (v > tol) return "+";
    if (v < -tol) return "-";
    return "0";
}

}  // namespace credence
