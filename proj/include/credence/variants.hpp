#pragma once

#include "credence/core.hpp"
#include "credence/equilibrium.hpp"

namespace credence {

// Refund contract: an undertreated consumer gets p_m back on return.
double alt_contract_threshold(const ModelParams& p);
EquilibriumProfile alternative_contract_equilibrium(const ModelParams& p, double tol = default_tol());

// Undertreatment goes unnoticed with probability delta.
struct DeltaThresholds {
    double pivot = 0;  // (p_m-c_m)/(p_s-c_s)
    double mu_1 = 0;
    double mu_1_printed = 0;
    double mu_2 = 1;
    double mu_3 = 1;
};
DeltaThresholds delta_thresholds(const ModelParams& p);
EquilibriumProfile delayed_discovery_equilibrium(const ModelParams& p, double tol = default_tol());

// k_return > k. hidden_history selects the hidden-history version.
double resentment_threshold(const ModelParams& p);
EquilibriumProfile resentment_equilibrium(const ModelParams& p, double tol = default_tol());

// Heterogeneous capability.
struct AlphaThresholds {
    double pivot = 0;  // (k-k')/(l_s-p_s)
    double mu_1 = 0;
    double mu_2 = 1;
    double mu_3 = 0;
};
AlphaThresholds alpha_thresholds(const ModelParams& p);
double tau_h(double alpha, double t_s1);
EquilibriumProfile heterogeneous_capability_equilibrium(const ModelParams& p, double tol = default_tol());

// Opportunistic-only market with prices set by the experts.
struct PriceQuote {
    double p_m_star = 0;
    double p_s_star = 0;
};
PriceQuote endogenous_prices(const ModelParams& p);
double endogenous_mu_bound(const ModelParams& p);
EquilibriumProfile endogenous_price_equilibrium(const ModelParams& p, double tol = default_tol());

}  // namespace credence
