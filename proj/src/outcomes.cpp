#include "credence/outcomes.hpp"

#include <cmath>

#include "credence/params_io.hpp"

namespace credence {

namespace {

void require_base_tag(const EquilibriumProfile& eq) {
    if (eq.regime != Regime::FOFU && eq.regime != Regime::POFU && eq.regime != Regime::FOPU)
        throw Error(ErrorKind::RegimeMismatch,
                    std::string(regime_name(eq.regime)) + " has no base-model closed form");
}

}  // namespace

double expert_profit(const ModelParams& p, const EquilibriumProfile& eq) {
    require_base_tag(eq);
    const double mu = p.mu, ms = p.margin_s(), mm = p.margin_m();
    switch (eq.regime) {
        case Regime::FOFU: return (1 - mu) * (ms + mm) + mu * ms;
        case Regime::POFU: return (1 - mu) * (ms + mm) + mu * mm;
        default: return ms;
    }
}

double consumer_welfare(const ModelParams& p, const EquilibriumProfile& eq, bool include_first_search) {
    require_base_tag(eq);
    const double mu = p.mu, h = p.h, pm = p.p_m, ps = p.p_s, kr = p.k_return;
    const double undertreated = pm + kr + ps;
    // Mixed recommendations leave the consumer indifferent, so each
    // recommendation is worth its acceptance payoff.
    double tm = h, ts = h;
    if (eq.regime == Regime::POFU) tm = h + (1 - h) * eq.expert.t_m1;
    if (eq.regime == Regime::FOPU) ts = h + (1 - h) * eq.expert.t_s1;
    double cost = mu * (tm * pm + (1 - tm) * ps) + (1 - mu) * (ts * ps + (1 - ts) * undertreated);
    return -cost - (include_first_search ? p.k : 0.0);
}

OutcomeMetrics outcome_metrics(const ModelParams& p, const EquilibriumProfile& eq) {
    return {expert_profit(p, eq), consumer_welfare(p, eq), eq.regime};
}

double mu_3_star(const ModelParams& p) {
    const double k = p.k, d = p.spread();
    return k / (d + 2 * k - 2 * std::sqrt(k * d));
}

double h_1_star(const ModelParams& p) {
    const double mu = p.mu, k = p.k, d = p.spread(), x = p.x_return();
    const double b = mu * (d + k) + (1 - mu) * x;
    const double disc = b * b - 4 * mu * (1 - mu) * d * x;
    if (disc < 0) throw Error(ErrorKind::UndefinedThreshold, "h_1_star: negative discriminant");
    return (b - std::sqrt(disc)) / (2 * mu * d);
}

double h_2_star(const ModelParams& p) {
    return (p.p_s + p.k_return) * p.k / (2 * p.spread() * (p.p_m + p.k_return));
}

double h_3_star(const ModelParams& p) {
    return p.k * (p.p_s + p.k_return) / (p.spread() * (p.p_m + p.k_return));
}

StaticsThresholds statics_thresholds(const ModelParams& p) {
    return {mu_3_star(p), h_1_star(p), h_2_star(p), h_3_star(p)};
}

std::vector<MonotonicityCell> monotonicity_report(const ModelParams& p, const std::string& along, int grid_n,
                                                  double tol) {
    if (grid_n < 3) throw Error(ErrorKind::BadArgument, "grid_n must be at least 3");
    if (along != "h" && along != "mu") throw Error(ErrorKind::BadArgument, "along must be h or mu");
    std::vector<MonotonicityCell> cells(grid_n);
    for (int i = 0; i < grid_n; ++i) {
        ModelParams q = p;
        double x = static_cast<double>(i + 1) / (grid_n + 1);
        set_field(q, along, x);
        auto eq = classify_equilibrium(q, tol);
        cells[i].x = x;
        cells[i].regime = eq.regime;
        if (eq.regime != Regime::NONE) {
            cells[i].profit = expert_profit(q, eq);
            cells[i].welfare = consumer_welfare(q, eq);
        }
    }
    auto sgn = [tol](double v) { return v > tol ? 1 : (v < -tol ? -1 : 0); };
    for (int i = 0; i + 1 < grid_n; ++i) {
        cells[i].d_profit = sgn(cells[i + 1].profit - cells[i].profit);
        cells[i].d_welfare = sgn(cells[i + 1].welfare - cells[i].welfare);
        cells[i].jump = cells[i + 1].regime != cells[i].regime;
    }
    return cells;
}

}  // namespace credence
