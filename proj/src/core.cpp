#include "credence/core.hpp"

#include <cstdlib>
#include <string>

namespace credence {

double default_tol() {
    if (const char* env = std::getenv("CREDENCE_TOL")) {
        char* end = nullptr;
        double v = std::strtod(env, &end);
        if (end != env && *end == '\0' && v >= 0) return v;
    }
    return kDefaultTol;
}

std::string_view model_name(Model m) {
    switch (m) {
        case Model::base: return "base";
        case Model::epsilon: return "epsilon";
        case Model::capacity: return "capacity";
        case Model::hidden_history: return "hidden_history";
        case Model::alt_contract: return "alt_contract";
        case Model::delta: return "delta";
        case Model::resentment: return "resentment";
        case Model::heterogeneity: return "heterogeneity";
        case Model::endogenous_price: return "endogenous_price";
    }
    return "?";
}

std::optional<Model> parse_model(std::string_view s) {
    for (Model m : kAllModels)
        if (model_name(m) == s) return m;
    return std::nullopt;
}

std::string_view error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::InvalidParam: return "InvalidParam";
        case ErrorKind::Schema: return "Schema";
        case ErrorKind::BadArgument: return "BadArgument";
        case ErrorKind::ZeroProbabilityEvent: return "ZeroProbabilityEvent";
        case ErrorKind::EmptyFOPURegion: return "EmptyFOPURegion";
        case ErrorKind::BoundaryAmbiguity: return "BoundaryAmbiguity";
        case ErrorKind::RegimeMismatch: return "RegimeMismatch";
        case ErrorKind::RegimeCrossing: return "RegimeCrossing";
        case ErrorKind::UndefinedThreshold: return "UndefinedThreshold";
        case ErrorKind::DegenerateStep: return "DegenerateStep";
        case ErrorKind::EpsilonTooLarge: return "EpsilonTooLarge";
        case ErrorKind::NotResentment: return "NotResentment";
        case ErrorKind::ResentmentRegime: return "ResentmentRegime";
        case ErrorKind::NoEquilibriumFound: return "NoEquilibriumFound";
        case ErrorKind::Io: return "Io";
    }
    return "?";
}

Error::Error(ErrorKind kind, std::string detail)
    : std::runtime_error(std::string(error_kind_name(kind)) + "(" + detail + ")"),
      kind_(kind),
      detail_(std::move(detail)) {}

int exit_code_for(ErrorKind k) {
    switch (k) {
        case ErrorKind::InvalidParam:
        case ErrorKind::Schema:
        case ErrorKind::BadArgument:
        case ErrorKind::DegenerateStep:
            return 2;
        case ErrorKind::Io:
            return 4;
        default:
            return 3;
    }
}

ModelParams demo_params(double h, double mu) {
    ModelParams p;
    p.h = h;
    p.mu = mu;
    return p;
}

std::vector<std::string> param_violations(const ModelParams& p) {
    std::vector<std::string> v;
    auto need = [&](bool ok, const char* name) {
        if (!ok) v.emplace_back(name);
    };
    need(p.h > 0 && p.h < 1, "0 < h < 1");
    need(p.mu > 0 && p.mu < 1, "0 < mu < 1");
    need(p.l_m > 0, "l_m > 0");
    need(p.l_s > p.l_m, "l_s > l_m");
    need(p.p_m > 0, "p_m > 0");
    need(p.p_s > p.p_m, "p_s > p_m");
    need(p.c_m >= 0, "c_m >= 0");
    need(p.c_s > p.c_m, "c_s > c_m");
    need(p.margin_s() > p.margin_m(), "margin ordering");
    need(p.p_s < p.l_m, "p_s < l_m");
    need(p.k_return >= 0, "k_return >= 0");
    if (p.resentment)
        need(p.k_return > p.k, "k_return > k");
    else
        need(p.k > p.k_return, "k > k_return");
    if (p.epsilon) need(*p.epsilon >= 0 && *p.epsilon < 0.5, "0 <= epsilon < 0.5");
    if (p.chi) need(*p.chi >= 0 && *p.chi <= 1, "0 <= chi <= 1");
    if (p.delta) need(*p.delta > 0 && *p.delta < 1, "0 < delta < 1");
    if (p.alpha) need(*p.alpha > 0 && *p.alpha < 1, "0 < alpha < 1");
    return v;
}

const ModelParams& validate_params(const ModelParams& p) {
    auto v = param_violations(p);
    if (!v.empty()) {
        std::string msg;
        for (size_t i = 0; i < v.size(); ++i) {
            if (i) msg += "; ";
            msg += v[i];
        }
        throw Error(ErrorKind::InvalidParam, msg);
    }
    return p;
}

std::pair<double, double> expected_truthfulness(const ModelParams& p, const ExpertStrategy& e) {
    return {p.h + (1 - p.h) * e.t_s1, p.h + (1 - p.h) * e.t_m1};
}

Beliefs posterior_beliefs(const ModelParams& p, const ExpertStrategy& e,
                          std::optional<double> off_path) {
    Beliefs b;
    auto [ts, tm] = expected_truthfulness(p, e);
    b.tbar_s = ts;
    b.tbar_m = tm;
    double pm_rec = p.mu * tm + (1 - p.mu) * (1 - ts);
    double ps_rec = (1 - p.mu) * ts + p.mu * (1 - tm);
    if (pm_rec > 0) {
        b.tau_m = p.mu * tm / pm_rec;
    } else {
        if (!off_path) throw Error(ErrorKind::ZeroProbabilityEvent, "minor recommendation");
        b.tau_m = *off_path;
    }
    if (ps_rec > 0) {
        b.tau_s = (1 - p.mu) * ts / ps_rec;
    } else {
        if (!off_path) throw Error(ErrorKind::ZeroProbabilityEvent, "serious recommendation");
        b.tau_s = *off_path;
    }
    return b;
}

}  // namespace credence
