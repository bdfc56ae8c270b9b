#pragma once

#include "credence/core.hpp"
#include "credence/equilibrium.hpp"

namespace credence {

// Diagnostic error -----------------------------------------------------------

struct EpsilonThresholds {
    double mu_1 = 0;  // minor acceptance against reject-then-accept
    double mu_2 = 1;  // serious acceptance
    double mu_3 = 0;  // minor acceptance against reject-then-reject
    double epsilon_star = 0;
};

double epsilon_star(const ModelParams& p);
EpsilonThresholds epsilon_thresholds(const ModelParams& p);  // uses p.epsilon (0 when unset)

// Throws EpsilonTooLarge when epsilon >= epsilon_star.
EquilibriumProfile epsilon_equilibrium(const ModelParams& p, double tol = default_tol());

struct EpsilonEffect {
    double d_mu_1 = 0;  // forward differences in epsilon at 0
    double d_mu_2 = 0;
    std::string_view sign_mu_1;
    std::string_view sign_mu_2;
};
EpsilonEffect epsilon_error_rate_effect(const ModelParams& p, double step = 1e-6, double tol = 1e-9);

// Capacity shocks ------------------------------------------------------------

struct CapacityThresholds {
    double chi_star = 0;
    double mu[6] = {0, 1, 0, 1, 0, 0};  // mu_chi_1 .. mu_chi_6
};

CapacityThresholds capacity_thresholds(const ModelParams& p);  // uses p.chi (0 when unset)
EquilibriumProfile capacity_equilibrium(const ModelParams& p, double tol = default_tol());

// Hidden diagnosis history ---------------------------------------------------

struct HiddenThresholds {
    double mu_1 = 0;
    double mu_2 = 1;
    double mu_3 = 0;
    double h_pivot = 0;  // (Ms - 2Mm)/(Ms - Mm), upper end of the serious-rejection band
};

struct VisitPosteriors {
    double gamma_m = 1;
    double gamma_s = 1;
    double gamma_mm = 0;
    double gamma_sm = 0;
};

HiddenThresholds hidden_thresholds(const ModelParams& p);
// Steady-state visit mix with one unit of new consumers per period.
VisitPosteriors visit_posteriors(const ModelParams& p, const ExpertStrategy& e, const ConsumerStrategy& c);
EquilibriumProfile hidden_history_equilibrium(const ModelParams& p, double tol = default_tol());

}  // namespace credence
