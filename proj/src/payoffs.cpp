#include "credence/payoffs.hpp"

namespace credence {

std::pair<ExpertStrategy, ConsumerStrategy> period2_strategies(const ModelParams&) {
    ExpertStrategy e;
    e.t_m2 = 0;
    e.t_s2 = 1;
    ConsumerStrategy c;
    c.a_m2 = 1;
    c.a_s2 = 1;
    return {e, c};
}

Revisit return_decision(const ModelParams& p) {
    if (p.k_return > p.k)
        throw Error(ErrorKind::ResentmentRegime, "k_return > k: undertreated consumers do not return");
    return Revisit::ReturnToInitial;
}

ConsumerDecisionValues consumer_values(const ModelParams& p, const Beliefs& b) {
    const double h = p.h, k = p.k;
    ConsumerDecisionValues v;
    v.accept_serious = -p.p_s;
    v.reject_serious = b.tau_s * (-p.p_s - k) + (1 - b.tau_s) * h * (-p.p_m - k) +
                       (1 - b.tau_s) * (1 - h) * (-p.p_s - k);
    v.accept_minor = -b.tau_m * p.p_m + (1 - b.tau_m) * (-p.p_m - p.p_s - p.k_return);
    v.reject_minor = b.tau_m * h * (-p.p_m - k) + b.tau_m * (1 - h) * (-p.p_s - k) +
                     (1 - b.tau_m) * (-p.p_s - k);
    return v;
}

ExpertDecisionValues expert_values(const ModelParams& p, const ConsumerStrategy& c) {
    const double ms = p.margin_s(), mm = p.margin_m();
    return {ms * c.a_s1 - mm * c.a_m1, (ms + mm) * c.a_m1 - ms * c.a_s1};
}

}  // namespace credence
