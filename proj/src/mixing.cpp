#include "mixing.hpp"

#include <cmath>

#include "credence/numerics.hpp"

namespace credence::detail {

std::optional<double> consumer_root(Model m, const ModelParams& p, ExpertStrategy e, const ConsumerStrategy& c,
                                    double ExpertStrategy::*field, int rec, double lo, double hi) {
    auto f = [&](double x) {
        e.*field = x;
        return oracle::evaluate(m, p, e, c).consumer_margin(rec);
    };
    auto roots = num::scan_roots(f, lo, hi, 64);
    if (roots.empty()) return std::nullopt;
    return roots.front();
}

double settle_a_m2(Model m, const ModelParams& p, const ExpertStrategy& e, ConsumerStrategy c) {
    c.a_m2 = 1;
    auto ev = oracle::evaluate(m, p, e, c);
    for (const char* name : {"consumer/visit2/after-minor/minor", "consumer/visit2/after-serious/minor"}) {
        if (const auto* s = ev.find(name)) return s->values[0] >= s->values[1] ? 1.0 : 0.0;
    }
    return 1.0;
}

bool reject_plan_binds(Model m, const ModelParams& p, const ExpertStrategy& e, const ConsumerStrategy& c, int rec) {
    auto ev = oracle::evaluate(m, p, e, c);
    const auto& s = ev.sets[rec];
    // values[1] is (m2=1, s2=1), values[2] is (m2=0, s2=1)
    return s.values[2] > s.values[1];
}

double accept_margin(Model m, const ModelParams& p, const ExpertStrategy& e, const ConsumerStrategy& c, int rec) {
    return oracle::evaluate(m, p, e, c).consumer_margin(rec);
}

void set_pattern(EquilibriumProfile& eq, Regime r, double t_m1, double t_s1, double a_m1, double a_s1) {
    eq.regime = r;
    eq.expert.t_m1 = t_m1;
    eq.expert.t_s1 = t_s1;
    eq.consumer.a_m1 = a_m1;
    eq.consumer.a_s1 = a_s1;
}

Side band_side(double mu, double lower, double upper, double tol, bool& boundary) {
    boundary = false;
    if (lower <= upper) {
        bool near_lo = lower > 0 && std::abs(mu - lower) <= tol;
        bool near_hi = upper < 1 && std::abs(mu - upper) <= tol;
        if (near_lo || near_hi) {
            boundary = true;
            return Side::Band;
        }
        if (mu < lower) return Side::Below;
        if (mu > upper) return Side::Above;
        return Side::Band;
    }
    boundary = std::abs(mu - lower) <= tol || std::abs(mu - upper) <= tol;
    if (mu > upper && mu < lower) return Side::Overlap;
    return mu >= lower ? Side::Above : Side::Below;
}

}  // namespace credence::detail
