#pragma once

#include <utility>

#include "credence/core.hpp"

namespace credence {

struct ConsumerDecisionValues {
    double accept_serious = 0;
    double reject_serious = 0;
    double accept_minor = 0;
    double reject_minor = 0;
};

struct ExpertDecisionValues {
    double overtreat_margin = 0;   // IC(Excessive), left minus right
    double undertreat_margin = 0;  // IC(Inadequate), left minus right
};

enum class Revisit { ReturnToInitial };

// Second-visit play: only the t_m2, t_s2, a_m2, a_s2 fields are meaningful.
std::pair<ExpertStrategy, ConsumerStrategy> period2_strategies(const ModelParams& p);

// Throws ResentmentRegime when k_return > k.
Revisit return_decision(const ModelParams& p);

// Payoffs after the first search cost is sunk.
ConsumerDecisionValues consumer_values(const ModelParams& p, const Beliefs& b);
ExpertDecisionValues expert_values(const ModelParams& p, const ConsumerStrategy& c);

}  // namespace credence
