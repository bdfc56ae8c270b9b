#pragma once

// Internal helpers shared by the extension and variant classifiers.

#include <optional>

#include "credence/equilibrium.hpp"
#include "credence/oracle.hpp"

namespace credence::detail {

// Root in (lo, hi) of accept minus the best rejection plan at the first-visit
// consumer set `rec`, as a function of one first-visit expert field.
std::optional<double> consumer_root(Model m, const ModelParams& p, ExpertStrategy e, const ConsumerStrategy& c,
                                    double ExpertStrategy::*field, int rec, double lo = kDefaultTol,
                                    double hi = 1 - kDefaultTol);

// a_m2 = 0 when an on-path second visitor prefers rejecting a minor
// recommendation, else 1.
double settle_a_m2(Model m, const ModelParams& p, const ExpertStrategy& e, ConsumerStrategy c);

// True when the rejection plan with second-visit minor rejection beats the
// one with acceptance at the first-visit set `rec`.
bool reject_plan_binds(Model m, const ModelParams& p, const ExpertStrategy& e, const ConsumerStrategy& c, int rec);

// Strict first-visit acceptance margin at `rec` (accept minus best rejection).
double accept_margin(Model m, const ModelParams& p, const ExpertStrategy& e, const ConsumerStrategy& c, int rec);

void set_pattern(EquilibriumProfile& eq, Regime r, double t_m1, double t_s1, double a_m1, double a_s1);

// Threshold-band classification shared by the three-regime maps: FOFU on
// [lower, upper], POFU-like above, FOPU-like below. Returns which side.
enum class Side { Below, Band, Above, Overlap };
Side band_side(double mu, double lower, double upper, double tol, bool& boundary);

}  // namespace credence::detail

namespace credence::detail {

inline void mark_none(EquilibriumProfile& eq, Status s) {
    eq.regime = Regime::NONE;
    eq.status = s;
}

// Fills eq from a three-regime band map. pofu/fopu(eq, strict) build the
// mixed profile and return false when it does not exist; strict also asks
// that the pure side of the profile be a strict preference.
template <class Pofu, class Fopu>
void resolve_band(EquilibriumProfile& eq, const ModelParams& p, Side side, Pofu&& pofu, Fopu&& fopu) {
    switch (side) {
        case Side::Band:
            set_pattern(eq, Regime::FOFU, 0, 0, 1, 1);
            if (eq.boundary_flag) eq.notes.push_back("BoundaryAmbiguity: mu within TOL of a threshold, FOFU side returned");
            return;
        case Side::Above:
            if (!pofu(eq, false)) mark_none(eq, Status::Uncharacterized);
            return;
        case Side::Below:
            if (!fopu(eq, false)) mark_none(eq, Status::Uncharacterized);
            return;
        case Side::Overlap: {
            EquilibriumProfile a = eq, b = eq;
            bool pa = pofu(a, true), fb = fopu(b, true);
            if (pa && fb) {
                eq = p.mu > p.margin_m() / p.margin_s() ? a : b;
                eq.notes.push_back("overlap: tie broken by mu against (p_m-c_m)/(p_s-c_s)");
                eq.discrepancies.push_back({"overlap tie-break",
                                            "both mixed regimes exist; the printed rule picks the one with the "
                                            "lower expert profit; applied as printed"});
            } else if (pa) {
                eq = a;
            } else if (fb) {
                eq = b;
            } else {
                mark_none(eq, Status::NoDecisiveEquilibrium);
                eq.discrepancies.push_back({"overlap regime map", "thresholds cross and neither mixed regime exists"});
            }
            return;
        }
    }
}

}  // namespace credence::detail
