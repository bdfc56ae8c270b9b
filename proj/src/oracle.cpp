#include "credence/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "credence/numerics.hpp"

namespace credence::oracle {

namespace {

using Rec3 = std::array<double, 3>;

Rec3 honest_rec(int theta) { return theta == 0 ? Rec3{1, 0, 0} : Rec3{0, 1, 0}; }
Rec3 opp_rec(int theta, double tm, double ts) {
    return theta == 0 ? Rec3{tm, 1 - tm, 0} : Rec3{1 - ts, ts, 0};
}
constexpr Rec3 kMinorOnly{1, 0, 0};
constexpr Rec3 kRefuseOnly{0, 0, 1};

ModelParams effective_params(Model m, const ModelParams& p) {
    ModelParams q = p;
    if (m == Model::endogenous_price) {
        // opportunistic-only market at the equilibrium prices
        q.p_m = p.l_m;
        q.p_s = p.l_m - p.c_m + p.c_s;
        q.h = 0;
    }
    return q;
}

double loss(const ModelParams& q, int theta) { return theta == 0 ? q.l_m : q.l_s; }

// Sub-type used for a virtual cell at an off-path information set.
int default_sub(Model m, int theta) {
    switch (m) {
        case Model::epsilon: return theta;
        case Model::heterogeneity: return 1;
        default: return 0;
    }
}

int free_sub(Model m, int theta) {
    switch (m) {
        case Model::epsilon: return theta;  // decisions are keyed by diagnosis
        case Model::heterogeneity: return 1;
        default: return 0;
    }
}

bool has_refusals(Model m) { return m == Model::capacity || m == Model::heterogeneity; }

double expect_consumer(const Lottery& l) {
    double s = 0;
    for (auto& o : l) s += o.prob * o.consumer;
    return s;
}
double expect_profit(const Lottery& l) {
    double s = 0;
    for (auto& o : l) s += o.prob * o.profit;
    return s;
}

void push(Lottery& l, double prob, double consumer, double profit, unsigned flags) {
    if (prob > 0) l.push_back({prob, consumer, profit, flags});
}

InfoSet make_set(const char* who, const char* name, double reach, bool off,
                 std::initializer_list<const char*> acts, std::initializer_list<double> vals,
                 double played) {
    InfoSet s;
    s.who = who;
    s.name = name;
    s.reach = reach;
    s.off_path = off;
    int i = 0;
    for (auto* a : acts) s.actions[i++] = a;
    s.n = i;
    i = 0;
    for (double v : vals) s.values[i++] = v;
    s.played = played;
    return s;
}

constexpr const char* kVisit1Names[2] = {"consumer/visit1/minor", "consumer/visit1/serious"};
constexpr const char* kVisit2Names[2][2] = {
    {"consumer/visit2/after-minor/minor", "consumer/visit2/after-minor/serious"},
    {"consumer/visit2/after-serious/minor", "consumer/visit2/after-serious/serious"}};
// Reject plans in InfoSet order after "accept": (second-visit minor, serious) acceptance.
constexpr double kPlans[4][2] = {{1, 1}, {0, 1}, {1, 0}, {0, 0}};

int plan_index(double x, double y) {
    for (int i = 0; i < 4; ++i)
        if (kPlans[i][0] == x && kPlans[i][1] == y) return 1 + i;
    return -1;
}

}  // namespace

// ---------------------------------------------------------------- tree

PayoffTree::PayoffTree(Model m, const ModelParams& p, const ExpertStrategy& e, const ConsumerStrategy& c)
    : model_(m), q_(effective_params(m, p)), e_(e), c_(c) {
    hidden_ = m == Model::hidden_history || (m == Model::resentment && p.hidden_history);
    build_cells();
    build_second();
    decide_undertreated();
    decide_second_visit();
    refuse_search_ = -q_.k + second_visit_value(1, 0, 1) >= -q_.l_s;
    accept_.resize(cells_.size());
    for (size_t i = 0; i < cells_.size(); ++i) {
        const Cell& cl = cells_[i];
        accept_[i][kMinor] = accept_lottery(cl.theta, cl.sub, kMinor);
        accept_[i][kSerious] = accept_lottery(cl.theta, cl.sub, kSerious);
        accept_[i][kRefuse] = refusal_lottery();
    }
    for (int th = 0; th < 2; ++th)
        for (int r = 0; r < 2; ++r) reject_[th][r] = reject_lottery_build(th, r);
}

void PayoffTree::build_cells() {
    const double h = q_.h, mu = q_.mu;
    auto add = [&](double prob, int th, bool opp, bool fr, int sub, Rec3 rec) {
        if (prob > 0) cells_.push_back({prob, th, opp, fr, sub, rec});
    };
    for (int th = 0; th < 2; ++th) {
        double pt = th == 0 ? mu : 1 - mu;
        switch (model_) {
            case Model::epsilon: {
                double eps = q_.epsilon.value_or(0);
                for (int d : {th, 1 - th}) {
                    double pd = d == th ? 1 - eps : eps;
                    add(pt * h * pd, th, false, false, d, honest_rec(d));
                    add(pt * (1 - h) * pd, th, true, true, d, opp_rec(d, e_.t_m1, e_.t_s1));
                }
                break;
            }
            case Model::capacity: {
                double chi = q_.chi.value_or(0);
                for (int shocked : {0, 1}) {
                    double pc = shocked ? chi : 1 - chi;
                    add(pt * h * pc, th, false, false, shocked,
                        (shocked && th == 1) ? kRefuseOnly : honest_rec(th));
                    if (shocked)
                        add(pt * (1 - h) * pc, th, true, false, shocked, kMinorOnly);
                    else
                        add(pt * (1 - h) * pc, th, true, true, shocked, opp_rec(th, e_.t_m1, e_.t_s1));
                }
                break;
            }
            case Model::heterogeneity: {
                double a = q_.alpha.value_or(1);
                for (int high : {1, 0}) {
                    double pa = high ? a : 1 - a;
                    add(pt * h * pa, th, false, false, high,
                        high ? honest_rec(th) : (th == 0 ? kMinorOnly : kRefuseOnly));
                    if (high)
                        add(pt * (1 - h) * pa, th, true, true, high, opp_rec(th, e_.t_m1, e_.t_s1));
                    else
                        add(pt * (1 - h) * pa, th, true, false, high, kMinorOnly);
                }
                break;
            }
            default:
                add(pt * h, th, false, false, 0, honest_rec(th));
                add(pt * (1 - h), th, true, true, 0, opp_rec(th, e_.t_m1, e_.t_s1));
        }
    }
}

void PayoffTree::build_second() {
    const double h = q_.h;
    // Without history the second expert cannot tell a returning visitor apart.
    const double tm = hidden_ ? e_.t_m1 : e_.t_m2;
    const double ts = hidden_ ? e_.t_s1 : e_.t_s2;
    for (int th = 0; th < 2; ++th) {
        auto& v = second_[th];
        auto add = [&](double prob, Rec3 rec) {
            if (prob > 0) v.push_back({prob, rec});
        };
        switch (model_) {
            case Model::epsilon: {
                double eps = q_.epsilon.value_or(0);
                for (int d : {th, 1 - th}) {
                    double pd = d == th ? 1 - eps : eps;
                    add(h * pd, honest_rec(d));
                    add((1 - h) * pd, opp_rec(d, tm, ts));
                }
                break;
            }
            case Model::capacity: {
                double chi = q_.chi.value_or(0);
                add(h * (1 - chi), honest_rec(th));
                add(h * chi, th == 1 ? kRefuseOnly : honest_rec(th));
                add((1 - h) * (1 - chi), opp_rec(th, tm, ts));
                add((1 - h) * chi, kMinorOnly);
                break;
            }
            case Model::heterogeneity: {
                double a = q_.alpha.value_or(1);
                add(h * a, honest_rec(th));
                add(h * (1 - a), th == 0 ? kMinorOnly : kRefuseOnly);
                add((1 - h) * a, opp_rec(th, tm, ts));
                add((1 - h) * (1 - a), kMinorOnly);
                break;
            }
            default:
                add(h, honest_rec(th));
                add(1 - h, opp_rec(th, tm, ts));
        }
    }
}

double PayoffTree::second_minor_prob(int theta) const {
    double s = 0;
    for (auto& sc : second_[theta]) s += sc.prob * sc.rec[kMinor];
    return s;
}

double PayoffTree::second_serious_prob(int theta) const {
    double s = 0;
    for (auto& sc : second_[theta]) s += sc.prob * sc.rec[kSerious];
    return s;
}

double PayoffTree::second_visit_value(int theta, double x, double y) const {
    const double l = loss(q_, theta);
    const double acc_m = -q_.p_m - (theta == 1 ? q_.l_s : 0);
    double v = 0;
    for (auto& sc : second_[theta]) {
        v += sc.prob * (sc.rec[kMinor] * (x * acc_m + (1 - x) * -l) +
                        sc.rec[kSerious] * (y * -q_.p_s + (1 - y) * -l) + sc.rec[kRefuse] * -l);
    }
    return v;
}

void PayoffTree::decide_undertreated() {
    if (model_ == Model::resentment) {
        uchoice_ = 1;
        return;
    }
    if (model_ == Model::heterogeneity) {
        const double a = q_.alpha.value_or(1);
        double w = 0, wh = 0;
        for (auto& cl : cells_) {
            if (cl.theta != 1) continue;
            w += cl.prob * cl.rec[kMinor];
            if (cl.sub == 1) wh += cl.prob * cl.rec[kMinor];
        }
        tau_h_ = w > 0 ? wh / w : a;
        double ret = -q_.k_return - (tau_h_ * q_.p_s + (1 - tau_h_) * q_.l_s);
        double search = -q_.k - (a * q_.p_s + (1 - a) * q_.l_s);
        uchoice_ = search > ret ? 1 : 0;
        return;
    }
    if (model_ == Model::endogenous_price) {
        uchoice_ = -q_.l_s > -q_.k_return - q_.p_s ? 2 : 0;
        return;
    }
    uchoice_ = 0;
}

void PayoffTree::decide_second_visit() {
    for (int r = 0; r < 2; ++r) {
        const double a = acceptance(r);
        std::array<double, 2> on{0, 0}, all{0, 0};
        for (auto& cl : cells_) {
            on[cl.theta] += cl.prob * cl.rec[r] * (1 - a);
            all[cl.theta] += cl.prob * cl.rec[r];
        }
        on_path_[r] = on[0] + on[1] > 0;
        if (on_path_[r]) {
            x_[r] = c_.a_m2;
            continue;
        }
        if (all[0] + all[1] <= 0) all = r == 0 ? std::array<double, 2>{1, 0} : std::array<double, 2>{0, 1};
        double acc = 0, rej = 0, mass = 0;
        for (int th = 0; th < 2; ++th) {
            double w = all[th] * second_minor_prob(th);
            mass += w;
            acc += w * (-q_.p_m - (th == 1 ? q_.l_s : 0));
            rej += w * -loss(q_, th);
        }
        x_[r] = (mass <= 0 || acc >= rej) ? 1 : 0;
    }
}

Lottery PayoffTree::accept_lottery(int theta, int sub, int rec) const {
    const double pm = q_.p_m, ps = q_.p_s, k = q_.k, kr = q_.k_return, ls = q_.l_s;
    const double mm = q_.margin_m(), ms = q_.margin_s();
    Lottery l;
    if (rec == kRefuse) return refusal_lottery();
    if (rec == kSerious) {
        push(l, 1, -ps, ms, theta == 0 ? unsigned{kOvertreated} : 0u);
        return l;
    }
    if (theta == 0) {
        push(l, 1, -pm, mm, 0);
        return l;
    }
    const unsigned ur = kUndertreated | kReturned;
    switch (model_) {
        case Model::capacity: {
            double chi = q_.chi.value_or(0);
            // the first expert may be shocked when the consumer comes back
            push(l, chi, -(pm + kr + ls), mm, ur);
            push(l, 1 - chi, -(pm + kr + ps), mm + ms, ur);
            break;
        }
        case Model::delta: {
            double d = q_.delta.value_or(0);
            push(l, 1 - d, -(pm + kr + ps), mm + ms, ur);
            push(l, d, -(pm + ls), mm, kUndertreated);
            break;
        }
        case Model::alt_contract:
            // the minor fee is refunded, the consumer pays p_s on return
            push(l, 1, -(ps + kr), ps - q_.c_m - q_.c_s, ur);
            break;
        case Model::resentment:
            push(l, 1, -(pm + k + ps), mm, kUndertreated | kSearched);
            break;
        case Model::heterogeneity: {
            double a = q_.alpha.value_or(1);
            if (uchoice_ == 1) {
                push(l, a, -(pm + k + ps), mm, kUndertreated | kSearched);
                push(l, 1 - a, -(pm + k + ls), mm, kUndertreated | kSearched);
            } else if (sub == 1) {
                push(l, 1, -(pm + kr + ps), mm + ms, ur);
            } else {
                push(l, 1, -(pm + kr + ls), mm, ur);
            }
            break;
        }
        case Model::endogenous_price:
            if (uchoice_ == 2)
                push(l, 1, -(pm + ls), mm, kUndertreated);
            else
                push(l, 1, -(pm + kr + ps), mm + ms, ur);
            break;
        default:
            push(l, 1, -(pm + kr + ps), mm + ms, ur);
    }
    return l;
}

Lottery PayoffTree::refusal_lottery() const {
    Lottery l;
    if (!has_refusals(model_)) return l;
    if (!refuse_search_) {
        push(l, 1, -q_.l_s, 0, 0);
        return l;
    }
    for (auto& sc : second_[1]) {
        push(l, sc.prob * sc.rec[kSerious], -q_.k - q_.p_s, 0, kSearched);
        push(l, sc.prob * (sc.rec[kMinor] + sc.rec[kRefuse]), -q_.k - q_.l_s, 0, kSearched);
    }
    return l;
}

Lottery PayoffTree::reject_lottery_build(int theta, int rec) const {
    const double x = x_[rec], y = c_.a_s2, k = q_.k, l_th = loss(q_, theta);
    Lottery l;
    for (auto& sc : second_[theta]) {
        push(l, sc.prob * sc.rec[kMinor] * x, -k - q_.p_m - (theta == 1 ? q_.l_s : 0), 0,
             kSearched | (theta == 1 ? kUndertreated : 0u));
        push(l, sc.prob * sc.rec[kMinor] * (1 - x), -k - l_th, 0, kSearched);
        push(l, sc.prob * sc.rec[kSerious] * y, -k - q_.p_s, 0, kSearched | (theta == 0 ? kOvertreated : 0u));
        push(l, sc.prob * sc.rec[kSerious] * (1 - y), -k - l_th, 0, kSearched);
        push(l, sc.prob * sc.rec[kRefuse], -k - l_th, 0, kSearched);
    }
    return l;
}

// ---------------------------------------------------------------- evaluation

double InfoSet::best() const {
    double b = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) b = std::max(b, values[i]);
    return b;
}

int InfoSet::best_action() const {
    int bi = 0;
    for (int i = 1; i < n; ++i)
        if (values[i] > values[bi]) bi = i;
    return bi;
}

const InfoSet* TreeEval::find(const char* name) const {
    for (auto& s : sets)
        if (std::string_view(s.name) == name) return &s;
    return nullptr;
}

double TreeEval::consumer_margin(int rec) const {
    const InfoSet& s = sets[rec];
    double best_rej = -std::numeric_limits<double>::infinity();
    for (int i = 1; i < s.n; ++i) best_rej = std::max(best_rej, s.values[i]);
    return s.values[0] - best_rej;
}

TreeEval evaluate(const PayoffTree& t) {
    TreeEval out;
    out.sets.reserve(16);
    const Model m = t.model();
    const ModelParams& q = t.params();
    const ExpertStrategy& e = t.expert();
    const ConsumerStrategy& c = t.consumer();
    const auto& cells = t.cells();
    const double k = q.k, mm = q.margin_m(), ms = q.margin_s();

    // first-visit consumer sets: always sets[0] (minor) and sets[1] (serious)
    for (int r = 0; r < 2; ++r) {
        double reach = 0, acc = 0;
        std::array<double, 2> w{0, 0};
        for (size_t i = 0; i < cells.size(); ++i) {
            double wi = cells[i].prob * cells[i].rec[r];
            if (wi <= 0) continue;
            reach += wi;
            w[cells[i].theta] += wi;
            acc += wi * expect_consumer(t.first_lottery(i, r));
        }
        bool off = reach <= 0;
        if (off) {
            w = r == 0 ? std::array<double, 2>{1, 0} : std::array<double, 2>{0, 1};
            acc = expect_consumer(t.accept_lottery(r, default_sub(m, r), r));
        } else {
            acc /= reach;
            w[0] /= reach;
            w[1] /= reach;
        }
        auto rej = [&](double x, double y) {
            return -k + w[0] * t.second_visit_value(0, x, y) + w[1] * t.second_visit_value(1, x, y);
        };
        double a = t.acceptance(r);
        double played = a * acc + (1 - a) * rej(t.second_minor_accept(r), c.a_s2);
        InfoSet s = make_set("consumer", kVisit1Names[r], reach, off,
                             {"accept", "reject,m2=1,s2=1", "reject,m2=0,s2=1", "reject,m2=1,s2=0",
                              "reject,m2=0,s2=0"},
                             {acc, rej(1, 1), rej(0, 1), rej(1, 0), rej(0, 0)}, played);
        if (m == Model::endogenous_price) {
            s.actions[s.n] = "quit";
            s.values[s.n] = -(w[0] * q.l_m + w[1] * q.l_s);
            ++s.n;
        }
        out.sets.push_back(s);
        if (r == 0)
            out.tau_m = w[0];
        else
            out.tau_s = w[1];
    }

    if (has_refusals(m)) {
        double reach = 0;
        for (auto& cl : cells) reach += cl.prob * cl.rec[kRefuse];
        double bear = -q.l_s, search = -k + t.second_visit_value(1, 0, 1);
        out.sets.push_back(make_set("consumer", "consumer/visit1/refused", reach, reach <= 0,
                                    {"bear-loss", "search"}, {bear, search}, std::max(bear, search)));
    }

    if (m == Model::heterogeneity || m == Model::endogenous_price) {
        double reach = 0;
        for (auto& cl : cells)
            if (cl.theta == 1) reach += cl.prob * cl.rec[kMinor] * c.a_m1;
        if (m == Model::heterogeneity) {
            const double a = q.alpha.value_or(1), th = t.tau_h();
            double ret = -q.k_return - (th * q.p_s + (1 - th) * q.l_s);
            double search = -k - (a * q.p_s + (1 - a) * q.l_s);
            out.sets.push_back(make_set("consumer", "consumer/undertreated", reach, reach <= 0,
                                        {"return", "search"}, {ret, search},
                                        t.undertreated_choice() == 1 ? search : ret));
            out.tau_h = th;
        } else {
            double ret = -q.k_return - q.p_s, quit = -q.l_s;
            out.sets.push_back(make_set("consumer", "consumer/undertreated", reach, reach <= 0,
                                        {"return", "quit"}, {ret, quit},
                                        t.undertreated_choice() == 2 ? quit : ret));
        }
    }

    // second-visit consumer sets, only where reached
    std::array<std::array<double, 2>, 2> mass{};  // [history][theta]
    for (auto& cl : cells)
        for (int r = 0; r < 2; ++r) mass[r][cl.theta] += cl.prob * cl.rec[r] * (1 - t.acceptance(r));
    for (int r = 0; r < 2; ++r) {
        if (!t.rejection_on_path(r)) continue;
        double pm_w = 0, acc_m = 0, rej_m = 0, ps_w = 0, acc_s = 0, rej_s = 0;
        for (int th = 0; th < 2; ++th) {
            double wm = mass[r][th] * t.second_minor_prob(th);
            double ws = mass[r][th] * t.second_serious_prob(th);
            pm_w += wm;
            ps_w += ws;
            acc_m += wm * (-q.p_m - (th == 1 ? q.l_s : 0));
            rej_m += wm * -(th == 0 ? q.l_m : q.l_s);
            acc_s += ws * -q.p_s;
            rej_s += ws * -(th == 0 ? q.l_m : q.l_s);
        }
        if (pm_w > 0) {
            acc_m /= pm_w;
            rej_m /= pm_w;
            double x = t.second_minor_accept(r);
            out.sets.push_back(make_set("consumer", kVisit2Names[r][0], pm_w, false, {"accept", "reject"},
                                        {acc_m, rej_m}, x * acc_m + (1 - x) * rej_m));
        }
        if (ps_w > 0) {
            acc_s /= ps_w;
            rej_s /= ps_w;
            out.sets.push_back(make_set("consumer", kVisit2Names[r][1], ps_w, false, {"accept", "reject"},
                                        {acc_s, rej_s}, c.a_s2 * acc_s + (1 - c.a_s2) * rej_s));
        }
    }

    // expert decision sets
    auto v1 = [&](int theta, int sub, int rec) {
        return t.acceptance(rec) * expect_profit(t.accept_lottery(theta, sub, rec));
    };
    double second_total = mass[0][0] + mass[0][1] + mass[1][0] + mass[1][1];
    if (!t.hidden()) {
        const char* names[2] = {"expert/visit1/minor", "expert/visit1/serious"};
        for (int g = 0; g < 2; ++g) {
            double reach = 0;
            for (auto& cl : cells) {
                int key = m == Model::epsilon ? cl.sub : cl.theta;
                if (cl.free && key == g) reach += cl.prob;
            }
            int sub = free_sub(m, g);
            double tru = v1(g, sub, g), fr = v1(g, sub, 1 - g);
            double tg = g == 0 ? e.t_m1 : e.t_s1;
            out.sets.push_back(make_set("expert", names[g], reach, reach <= 0, {"truthful", "fraud"},
                                        {tru, fr}, tg * tru + (1 - tg) * fr));
        }
        // second visit: truthful versus fraud at second-visit acceptances
        double hist = mass[0][0] + mass[0][1];
        double xbar = second_total > 0
                          ? (hist * t.second_minor_accept(0) + (second_total - hist) * t.second_minor_accept(1)) /
                                second_total
                          : c.a_m2;
        double reach2 = second_total * (1 - q.h);
        double tm_tru = xbar * mm, tm_fr = c.a_s2 * ms;
        double ts_tru = c.a_s2 * ms, ts_fr = xbar * mm;
        out.sets.push_back(make_set("expert", "expert/visit2/minor", reach2, reach2 <= 0, {"truthful", "fraud"},
                                    {tm_tru, tm_fr}, e.t_m2 * tm_tru + (1 - e.t_m2) * tm_fr));
        out.sets.push_back(make_set("expert", "expert/visit2/serious", reach2, reach2 <= 0,
                                    {"truthful", "fraud"}, {ts_tru, ts_fr},
                                    e.t_s2 * ts_tru + (1 - e.t_s2) * ts_fr));
    } else {
        const char* names[2] = {"expert/minor", "expert/serious"};
        for (int g = 0; g < 2; ++g) {
            double first = 0;
            for (auto& cl : cells)
                if (cl.theta == g) first += cl.prob;
            double sec = mass[0][g] + mass[1][g];
            double gamma = first / (first + sec);
            double om_m = sec > 0 ? mass[0][g] / sec : 0;
            double om_s = sec > 0 ? mass[1][g] / sec : 0;
            auto v2 = [&](int rec) {
                if (rec == kSerious) return c.a_s2 * ms;
                return (om_m * t.second_minor_accept(0) + om_s * t.second_minor_accept(1)) * mm;
            };
            double tru = gamma * v1(g, 0, g) + (1 - gamma) * v2(g);
            double fr = gamma * v1(g, 0, 1 - g) + (1 - gamma) * v2(1 - g);
            double tg = g == 0 ? e.t_m1 : e.t_s1;
            out.sets.push_back(make_set("expert", names[g], (first + sec) * (1 - q.h), false,
                                        {"truthful", "fraud"}, {tru, fr}, tg * tru + (1 - tg) * fr));
            if (g == 0) {
                out.gamma_m = gamma;
                out.gamma_mm = om_m;
            } else {
                out.gamma_s = gamma;
                out.gamma_sm = om_m;
            }
        }
    }

    // aggregates over realized paths
    double welfare = 0, profit = 0, opp_mass = 0, over = 0, under = 0, ret = 0, search = 0;
    auto tally = [&](const Lottery& l, double w, bool opp) {
        for (auto& o : l) {
            double p = w * o.prob;
            welfare += p * o.consumer;
            if (opp) profit += p * o.profit;
            if (o.flags & kOvertreated) over += p;
            if (o.flags & kUndertreated) under += p;
            if (o.flags & kReturned) ret += p;
            if (o.flags & kSearched) search += p;
        }
    };
    for (size_t i = 0; i < cells.size(); ++i) {
        const Cell& cl = cells[i];
        if (cl.opportunistic) opp_mass += cl.prob;
        for (int r = 0; r < 3; ++r) {
            double w = cl.prob * cl.rec[r];
            if (w <= 0) continue;
            if (r == kRefuse) {
                tally(t.first_lottery(i, r), w, cl.opportunistic);
                continue;
            }
            double a = t.acceptance(r);
            tally(t.first_lottery(i, r), w * a, cl.opportunistic);
            tally(t.reject_lottery(cl.theta, r), w * (1 - a), cl.opportunistic);
        }
    }
    out.welfare = welfare - k;
    out.profit = opp_mass > 0 ? profit / opp_mass : 0;
    out.over_rate = over;
    out.under_rate = under;
    out.return_rate = ret;
    out.search_rate = search;
    return out;
}

TreeEval evaluate(Model m, const ModelParams& p, const ExpertStrategy& e, const ConsumerStrategy& c) {
    return evaluate(PayoffTree(m, p, e, c));
}

// ---------------------------------------------------------------- replies, certification

const char* reply_name(Reply r) {
    switch (r) {
        case Reply::Accept: return "accept";
        case Reply::Reject: return "reject";
        case Reply::Truthful: return "truthful";
        case Reply::Fraud: return "fraud";
        case Reply::Indifferent: return "indifferent";
    }
    return "?";
}

BestResponses best_responses(Model m, const ModelParams& p, const ExpertStrategy& e,
                             const ConsumerStrategy& c, double tol) {
    TreeEval ev = evaluate(m, p, e, c);
    auto consumer = [&](int r) {
        double g = ev.consumer_margin(r);
        return g > tol ? Reply::Accept : (g < -tol ? Reply::Reject : Reply::Indifferent);
    };
    bool hidden = m == Model::hidden_history || (m == Model::resentment && p.hidden_history);
    auto expert = [&](const char* name) {
        const InfoSet* s = ev.find(name);
        double g = s->values[0] - s->values[1];
        return g > tol ? Reply::Truthful : (g < -tol ? Reply::Fraud : Reply::Indifferent);
    };
    BestResponses br;
    br.consumer_minor = consumer(kMinor);
    br.consumer_serious = consumer(kSerious);
    br.expert_minor = expert(hidden ? "expert/minor" : "expert/visit1/minor");
    br.expert_serious = expert(hidden ? "expert/serious" : "expert/visit1/serious");
    return br;
}

VerificationReport verify_equilibrium(Model m, const ModelParams& p, const ExpertStrategy& e,
                                      const ConsumerStrategy& c, double tol) {
    TreeEval ev = evaluate(m, p, e, c);
    VerificationReport rep;
    double worst = -std::numeric_limits<double>::infinity();
    for (auto& s : ev.sets) {
        double g = s.gain();
        if (g > worst) {
            worst = g;
            rep.witness_set = s.name;
            rep.witness_action = s.actions[s.best_action()];
        }
    }
    rep.max_gain = std::max(0.0, worst);
    rep.is_equilibrium = rep.max_gain <= tol;
    return rep;
}

VerificationReport verify_equilibrium(const ModelParams& p, const EquilibriumProfile& eq, double tol) {
    return verify_equilibrium(eq.model, p, eq.expert, eq.consumer, tol);
}

// ---------------------------------------------------------------- grid search

namespace {

struct Candidate {
    ExpertStrategy e;
    ConsumerStrategy c;
};

double* t_var(ExpertStrategy& e, int i) { return i == 0 ? &e.t_m1 : &e.t_s1; }
double* a_var(ConsumerStrategy& c, int i) { return i == 0 ? &c.a_m1 : &c.a_s1; }

// accept minus the rejection plan the profile would follow
double consumer_indiff(Model m, const ModelParams& p, const ExpertStrategy& e, const ConsumerStrategy& c,
                       int rec) {
    PayoffTree t(m, p, e, c);
    TreeEval ev = evaluate(t);
    const InfoSet& s = ev.sets[rec];
    int idx = plan_index(t.second_minor_accept(rec), c.a_s2);
    return s.values[0] - s.values[idx];
}

double expert_indiff(Model m, const ModelParams& p, const ExpertStrategy& e, const ConsumerStrategy& c,
                     int g) {
    TreeEval ev = evaluate(m, p, e, c);
    bool hidden = m == Model::hidden_history || (m == Model::resentment && p.hidden_history);
    const InfoSet* s = ev.find(g == 0 ? (hidden ? "expert/minor" : "expert/visit1/minor")
                                      : (hidden ? "expert/serious" : "expert/visit1/serious"));
    return s->values[0] - s->values[1];
}

// Roots of F(x, y) = G(x, y) = 0 by nested scanning; the inner solve keeps
// the first root of G(x, .) on each outer point.
template <class F, class G>
std::vector<std::pair<double, double>> solve2(F&& f, G&& g, double lo, double hi, int n) {
    auto inner = [&](double x) -> std::optional<double> {
        auto r = num::scan_roots([&](double y) { return g(x, y); }, lo, hi, n);
        if (r.empty()) return std::nullopt;
        return r.front();
    };
    auto outer = [&](double x) {
        auto y = inner(x);
        return y ? f(x, *y) : std::numeric_limits<double>::quiet_NaN();
    };
    std::vector<std::pair<double, double>> out;
    double x0 = lo, f0 = outer(lo);
    for (int i = 1; i < n; ++i) {
        double x1 = (i == n - 1) ? hi : lo + (hi - lo) * i / (n - 1);
        double f1 = outer(x1);
        if (std::isfinite(f0) && std::isfinite(f1) && (f0 == 0 || (f0 < 0) != (f1 < 0))) {
            bool ok = true;
            auto safe = [&](double x) {
                double v = outer(x);
                if (!std::isfinite(v)) ok = false;
                return std::isfinite(v) ? v : 0.0;
            };
            auto r = num::bisect(safe, x0, x1, f0, f1);
            if (ok && r)
                if (auto y = inner(*r)) out.emplace_back(*r, *y);
        }
        x0 = x1;
        f0 = f1;
    }
    return out;
}

}  // namespace

std::vector<EquilibriumProfile> find_equilibria_grid(Model m, const ModelParams& p, int grid_n, double tol) {
    if (grid_n < 11) throw Error(ErrorKind::BadArgument, "grid_n must be at least 11");
    const double lo = kDefaultTol, hi = 1 - kDefaultTol;
    ExpertStrategy e0;
    if (m == Model::endogenous_price) {
        e0.t_m2 = 1;
        e0.t_s2 = 1;
    }
    std::vector<Candidate> found;
    auto consider = [&](const ExpertStrategy& e, const ConsumerStrategy& c) {
        if (!verify_equilibrium(m, p, e, c, tol).is_equilibrium) return;
        for (auto& f : found) {
            if (std::abs(f.e.t_m1 - e.t_m1) < 1e-6 && std::abs(f.e.t_s1 - e.t_s1) < 1e-6 &&
                std::abs(f.c.a_m1 - c.a_m1) < 1e-6 && std::abs(f.c.a_s1 - c.a_s1) < 1e-6)
                return;
        }
        found.push_back({e, c});
    };

    constexpr int kMixed = 2;
    for (double am2 : {1.0, 0.0}) {
        for (int s = 0; s < 81; ++s) {
            int sup[4] = {s % 3, (s / 3) % 3, (s / 9) % 3, (s / 27) % 3};  // t_m1 t_s1 a_m1 a_s1
            std::vector<int> mt, ma;
            for (int i = 0; i < 2; ++i)
                if (sup[i] == kMixed) mt.push_back(i);
            for (int i = 0; i < 2; ++i)
                if (sup[2 + i] == kMixed) ma.push_back(i);
            if (mt.size() != ma.size()) continue;
            ExpertStrategy e = e0;
            ConsumerStrategy c;
            c.a_m2 = am2;
            for (int i = 0; i < 2; ++i) {
                if (sup[i] != kMixed) *t_var(e, i) = sup[i];
                if (sup[2 + i] != kMixed) *a_var(c, i) = sup[2 + i];
                else *a_var(c, i) = 0.5;
            }
            // a_m2 only matters when some rejection can happen
            if (am2 == 0.0 && sup[2] == 1 && sup[3] == 1) continue;

            if (mt.empty()) {
                consider(e, c);
            } else if (mt.size() == 1) {
                int tv = mt[0], av = ma[0];
                auto f = [&](double x) {
                    ExpertStrategy ee = e;
                    *t_var(ee, tv) = x;
                    return consumer_indiff(m, p, ee, c, av);
                };
                for (double tr : num::scan_roots(f, lo, hi, grid_n)) {
                    ExpertStrategy ee = e;
                    *t_var(ee, tv) = tr;
                    auto g = [&](double y) {
                        ConsumerStrategy cc = c;
                        *a_var(cc, av) = y;
                        return expert_indiff(m, p, ee, cc, tv);
                    };
                    for (double ar : num::scan_roots(g, lo, hi, grid_n)) {
                        ConsumerStrategy cc = c;
                        *a_var(cc, av) = ar;
                        consider(ee, cc);
                    }
                }
            } else {
                auto fm = [&](double x, double y) {
                    ExpertStrategy ee = e;
                    ee.t_m1 = x;
                    ee.t_s1 = y;
                    return consumer_indiff(m, p, ee, c, kMinor);
                };
                auto fs = [&](double x, double y) {
                    ExpertStrategy ee = e;
                    ee.t_m1 = x;
                    ee.t_s1 = y;
                    return consumer_indiff(m, p, ee, c, kSerious);
                };
                for (auto [tm, ts] : solve2(fm, fs, lo, hi, grid_n)) {
                    ExpertStrategy ee = e;
                    ee.t_m1 = tm;
                    ee.t_s1 = ts;
                    auto gm = [&](double x, double y) {
                        ConsumerStrategy cc = c;
                        cc.a_m1 = x;
                        cc.a_s1 = y;
                        return expert_indiff(m, p, ee, cc, 0);
                    };
                    auto gs = [&](double x, double y) {
                        ConsumerStrategy cc = c;
                        cc.a_m1 = x;
                        cc.a_s1 = y;
                        return expert_indiff(m, p, ee, cc, 1);
                    };
                    for (auto [am, as] : solve2(gm, gs, lo, hi, grid_n)) {
                        ConsumerStrategy cc = c;
                        cc.a_m1 = am;
                        cc.a_s1 = as;
                        consider(ee, cc);
                    }
                }
            }
        }
    }

    std::vector<EquilibriumProfile> out;
    for (auto& f : found) {
        EquilibriumProfile eq;
        eq.model = m;
        eq.expert = f.e;
        eq.consumer = f.c;
        eq.regime = regime_of(f.e, f.c, 1e-7);
        out.push_back(eq);
    }
    return out;
}

// ---------------------------------------------------------------- simulation

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

double uniform01(std::uint64_t seed, std::uint64_t index, std::uint64_t draw) {
    std::uint64_t key = splitmix64(seed ^ splitmix64(index));
    std::uint64_t v = splitmix64(key + draw * 0xD1B54A32D192ED03ull);
    return static_cast<double>(v >> 11) * 0x1.0p-53;
}

namespace {

struct Moments {
    std::uint64_t n = 0;
    double mean = 0, m2 = 0;
    void add(double x) {
        ++n;
        double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    void merge(const Moments& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        double nn = static_cast<double>(n + o.n);
        double d = o.mean - mean;
        mean += d * static_cast<double>(o.n) / nn;
        m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / nn;
        n += o.n;
    }
    std::optional<double> se() const {
        if (n < 2) return std::nullopt;
        return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
    }
};

struct BlockStats {
    Moments welfare, profit;
    std::uint64_t over = 0, under = 0, ret = 0, search = 0;
};

template <class Pick>
int pick_index(double u, int n, Pick&& prob) {
    double acc = 0;
    for (int i = 0; i < n; ++i) {
        acc += prob(i);
        if (u < acc) return i;
    }
    // rounding: fall back to the last positive entry
    for (int i = n - 1; i >= 0; --i)
        if (prob(i) > 0) return i;
    return 0;
}

}  // namespace

SimulationResult simulate_market(Model m, const ModelParams& p, const ExpertStrategy& e,
                                 const ConsumerStrategy& c, std::uint64_t n_consumers, std::uint64_t seed,
                                 int jobs) {
    if (n_consumers < 1) throw Error(ErrorKind::BadArgument, "n_consumers must be at least 1");
    PayoffTree t(m, p, e, c);
    const auto& cells = t.cells();
    const double k = t.params().k;
    const std::uint64_t n_blocks = (n_consumers + kSimBlock - 1) / kSimBlock;
    std::vector<BlockStats> blocks(n_blocks);

    auto run_block = [&](std::uint64_t b) {
        BlockStats& st = blocks[b];
        std::uint64_t begin = b * kSimBlock, end = std::min(n_consumers, begin + kSimBlock);
        for (std::uint64_t i = begin; i < end; ++i) {
            int ci = pick_index(uniform01(seed, i, 0), static_cast<int>(cells.size()),
                                [&](int j) { return cells[j].prob; });
            const Cell& cl = cells[ci];
            int r = pick_index(uniform01(seed, i, 1), 3, [&](int j) { return cl.rec[j]; });
            const Lottery* l;
            if (r == kRefuse) {
                l = &t.first_lottery(ci, r);
            } else {
                bool accept = uniform01(seed, i, 2) < t.acceptance(r);
                l = accept ? &t.first_lottery(ci, r) : &t.reject_lottery(cl.theta, r);
            }
            const Lottery& lot = *l;
            int oi = pick_index(uniform01(seed, i, 3), static_cast<int>(lot.size()),
                                [&](int j) { return lot[j].prob; });
            const Outcome& o = lot[oi];
            st.welfare.add(o.consumer - k);
            if (cl.opportunistic) st.profit.add(o.profit);
            st.over += (o.flags & kOvertreated) != 0;
            st.under += (o.flags & kUndertreated) != 0;
            st.ret += (o.flags & kReturned) != 0;
            st.search += (o.flags & kSearched) != 0;
        }
    };

    int workers = std::max(1, std::min<int>(jobs, static_cast<int>(n_blocks)));
    if (workers == 1) {
        for (std::uint64_t b = 0; b < n_blocks; ++b) run_block(b);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::uint64_t b = w; b < n_blocks; b += workers) run_block(b);
            });
        for (auto& th : pool) th.join();
    }

    BlockStats total;
    for (auto& b : blocks) {
        total.welfare.merge(b.welfare);
        total.profit.merge(b.profit);
        total.over += b.over;
        total.under += b.under;
        total.ret += b.ret;
        total.search += b.search;
    }
    SimulationResult res;
    res.n_consumers = n_consumers;
    res.n_opportunistic_first = total.profit.n;
    res.seed = seed;
    res.welfare_mean = total.welfare.mean;
    res.welfare_se = total.welfare.se();
    res.profit_mean = total.profit.mean;
    res.profit_se = total.profit.se();
    double n = static_cast<double>(n_consumers);
    res.over_rate = total.over / n;
    res.under_rate = total.under / n;
    res.return_rate = total.ret / n;
    res.search_rate = total.search / n;
    return res;
}

}  // namespace credence::oracle
