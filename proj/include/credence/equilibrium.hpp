#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "credence/core.hpp"

namespace credence {

// Pattern tags over (t_m1, t_s1, a_m1, a_s1); see README for the table.
enum class Regime { FOFU, POFU, FOPU, FONU, PONU, MONU, FOFU_RS, FOPU_MS, NOFU, OTHER, NONE };

std::string_view regime_name(Regime r);

// Why a profile carries Regime::NONE.
enum class Status { Ok, NoDecisiveEquilibrium, NoPureEquilibrium, Uncharacterized };
std::string_view status_name(Status s);

struct RegimeThresholds {
    double mu_1_star = 0;
    double mu_2_star = 1;
    bool h_below_pivot = false;  // h <= k/(p_s - p_m), so mu_2_star == 1
    bool empty_fopu = false;     // p_m + k' - k <= 0, mu_1_star clamped to 0
};

struct Threshold {
    std::string name;
    double value = 0;
};

// A printed formula that the implementation does not use as printed.
struct Discrepancy {
    std::string formula;
    std::string detail;
};

struct EquilibriumProfile {
    Model model = Model::base;
    Regime regime = Regime::NONE;
    Status status = Status::Ok;
    ExpertStrategy expert;
    ConsumerStrategy consumer;
    RegimeThresholds base_thresholds;
    std::vector<Threshold> thresholds;  // model-specific, by name
    std::vector<Threshold> extras;      // gamma weights, tau_h, prices
    bool boundary_flag = false;
    bool requires_oracle = false;
    std::vector<Discrepancy> discrepancies;
    std::vector<std::string> notes;

    double threshold(std::string_view name) const;  // NaN when absent
    double extra(std::string_view name) const;
};

// Tag of a strategy pattern; values within tol of 0 or 1 count as pure.
Regime regime_of(const ExpertStrategy& e, const ConsumerStrategy& c, double tol = 1e-9);

RegimeThresholds regime_thresholds(const ModelParams& p);

// Closed-form POFU/FOPU mixing values of the base model.
double base_pofu_t_m1(const ModelParams& p);
double base_fopu_t_s1(const ModelParams& p);

// Existence of the mixed regimes at the closed-form strategies: the mixing
// probability lies in (0,1) and the pure side's preference is strict.
bool base_pofu_exists(const ModelParams& p);
bool base_fopu_exists(const ModelParams& p);

EquilibriumProfile classify_equilibrium(const ModelParams& p, double tol = default_tol());

struct Sensitivity {
    std::string target;
    double step = 0;
    Regime regime = Regime::NONE;
    double d_t_m1 = 0;
    double d_t_s1 = 0;
    double d_mu_1_star = 0;
    double d_mu_2_star = 0;
};

// Central differences in k or p_s. Throws DegenerateStep for step == 0 and
// RegimeCrossing when p - step and p + step classify differently.
Sensitivity comparative_statics(const ModelParams& p, const std::string& target, double step);

// "+", "-" or "0" (within tol).
std::string_view sign_label(double v, double tol = 1e-12);

}  // namespace credence
