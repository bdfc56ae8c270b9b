#pragma once

#include <string>
#include <vector>

#include "credence/core.hpp"
#include "credence/equilibrium.hpp"

namespace credence {

struct OutcomeMetrics {
    double profit = 0;   // opportunistic expert, per consumer
    double welfare = 0;  // consumer, all search costs included
    Regime regime = Regime::NONE;
};

// Closed forms for the base regimes; RegimeMismatch for any other tag.
double expert_profit(const ModelParams& p, const EquilibriumProfile& eq);
// include_first_search = false drops the first k (participation view).
double consumer_welfare(const ModelParams& p, const EquilibriumProfile& eq, bool include_first_search = true);
OutcomeMetrics outcome_metrics(const ModelParams& p, const EquilibriumProfile& eq);

struct StaticsThresholds {
    double mu_3_star = 0;
    double h_1_star = 0;
    double h_2_star = 0;
    double h_3_star = 0;
};

double mu_3_star(const ModelParams& p);
// UndefinedThreshold when the discriminant at p.mu is negative.
double h_1_star(const ModelParams& p);
double h_2_star(const ModelParams& p);
double h_3_star(const ModelParams& p);
StaticsThresholds statics_thresholds(const ModelParams& p);

struct MonotonicityCell {
    double x = 0;
    Regime regime = Regime::NONE;
    double profit = 0;
    double welfare = 0;
    int d_profit = 0;  // sign of the step to the next cell (+1, -1, 0)
    int d_welfare = 0;
    bool jump = false;  // the next cell sits in another regime
};

// Base model along h or mu on an interior grid of grid_n points.
std::vector<MonotonicityCell> monotonicity_report(const ModelParams& p, const std::string& along, int grid_n,
                                                  double tol = default_tol());

}  // namespace credence
