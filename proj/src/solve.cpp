#include "credence/solve.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "credence/extensions.hpp"
#include "credence/oracle.hpp"
#include "credence/outcomes.hpp"
#include "credence/variants.hpp"

namespace credence {

Model infer_model(const ModelParams& p) {
    std::vector<std::pair<std::string, Model>> on;
    if (p.epsilon) on.emplace_back("epsilon", Model::epsilon);
    if (p.chi) on.emplace_back("chi", Model::capacity);
    if (p.delta) on.emplace_back("delta", Model::delta);
    if (p.alpha) on.emplace_back("alpha", Model::heterogeneity);
    if (p.alt_contract) on.emplace_back("alt_contract", Model::alt_contract);
    if (p.endogenous_price) on.emplace_back("endogenous_price", Model::endogenous_price);
    if (p.resentment)
        on.emplace_back("resentment", Model::resentment);
    else if (p.hidden_history)
        on.emplace_back("hidden_history", Model::hidden_history);
    if (on.size() > 1) {
        std::string keys;
        for (auto& [k, m] : on) keys += (keys.empty() ? "" : ", ") + k;
        throw Error(ErrorKind::Schema, "more than one variant key: " + keys);
    }
    return on.empty() ? Model::base : on.front().second;
}

ModelParams prepare_params(Model m, const ModelParams& p) {
    ModelParams q = p;
    auto need = [&](const std::optional<double>& v, const char* key) {
        if (!v) throw Error(ErrorKind::Schema, std::string("missing key '") + key + "' for model " +
                                                   std::string(model_name(m)));
    };
    switch (m) {
        case Model::epsilon: need(q.epsilon, "epsilon"); break;
        case Model::capacity: need(q.chi, "chi"); break;
        case Model::delta: need(q.delta, "delta"); break;
        case Model::heterogeneity: need(q.alpha, "alpha"); break;
        case Model::hidden_history: q.hidden_history = true; break;
        case Model::alt_contract: q.alt_contract = true; break;
        case Model::resentment: q.resentment = true; break;
        case Model::endogenous_price: q.endogenous_price = true; break;
        case Model::base: break;
    }
    Model implied = infer_model(q);
    if (implied != m && !(m == Model::base && implied == Model::base))
        throw Error(ErrorKind::Schema, "parameter keys select model " + std::string(model_name(implied)) +
                                           ", not " + std::string(model_name(m)));
    return q;
}

EquilibriumProfile solve(Model m, const ModelParams& p, double tol) {
    switch (m) {
        case Model::base: return classify_equilibrium(p, tol);
        case Model::epsilon: return epsilon_equilibrium(p, tol);
        case Model::capacity: return capacity_equilibrium(p, tol);
        case Model::hidden_history: return hidden_history_equilibrium(p, tol);
        case Model::alt_contract: return alternative_contract_equilibrium(p, tol);
        case Model::delta: return delayed_discovery_equilibrium(p, tol);
        case Model::resentment: return resentment_equilibrium(p, tol);
        case Model::heterogeneity: return heterogeneous_capability_equilibrium(p, tol);
        case Model::endogenous_price: return endogenous_price_equilibrium(p, tol);
    }
    throw Error(ErrorKind::BadArgument, "unknown model");
}

ProfileOutcome profile_outcome(const ModelParams& p, const EquilibriumProfile& eq) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    if (eq.regime == Regime::NONE) return {nan, nan, false};
    if (eq.model == Model::base && eq.regime != Regime::OTHER) return {expert_profit(p, eq), consumer_welfare(p, eq), true};
    auto ev = oracle::evaluate(eq.model, p, eq.expert, eq.consumer);
    return {ev.profit, ev.welfare, false};
}

ModelParams sample_params(Model m, std::mt19937_64& rng, bool hidden_resentment) {
    auto u = [&](double a, double b) { return a + (b - a) * u01(rng); };
    ModelParams p;
    p.p_m = u(0.5, 3);
    double d = u(0.5, 6);
    p.p_s = p.p_m + d;
    p.c_m = u(0, 0.8 * p.p_m);
    p.c_s = p.c_m + u01(rng) * d;
    p.l_m = p.p_s + u(0.1, 3);
    p.l_s = p.l_m + u(0.1, 8);
    p.k = u(0.05, 2);
    p.k_return = m == Model::resentment ? u(p.k, 2 * p.k) : u(0, p.k);
    p.h = u(0.02, 0.98);
    p.mu = u(0.02, 0.98);
    switch (m) {
        case Model::epsilon: p.epsilon = u(0, 0.45); break;
        case Model::capacity: p.chi = u01(rng); break;
        case Model::delta: p.delta = u(0.02, 0.98); break;
        case Model::heterogeneity: p.alpha = u(0.02, 0.98); break;
        case Model::hidden_history: p.hidden_history = true; break;
        case Model::alt_contract: p.alt_contract = true; break;
        case Model::resentment:
            p.resentment = true;
            p.hidden_history = hidden_resentment;
            break;
        case Model::endogenous_price: p.endogenous_price = true; break;
        case Model::base: break;
    }
    // rounding can land c_s on the margin boundary; redraw in that case
    if (!param_violations(p).empty()) return sample_params(m, rng, hidden_resentment);
    return p;
}

}  // namespace credence
