#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "credence/core.hpp"
#include "credence/equilibrium.hpp"
#include "credence/oracle.hpp"
#include "credence/outcomes.hpp"
#include "credence/params_io.hpp"
#include "credence/solve.hpp"

using namespace credence;
using nlohmann::json;

namespace {

struct Common {
    std::string params;
    std::string model;
    double tol = default_tol();
    int jobs = 1;
};

void add_common(CLI::App* c, Common& o) {
    c->add_option("--params", o.params, "parameter JSON file (DEMO point h=0.5 mu=0.5 when omitted)");
    c->add_option("--model", o.model, "model name; inferred from the parameter keys when omitted");
    c->add_option("--tol", o.tol, "certification tolerance");
    c->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
}

void check_tol(double tol) {
    if (!(tol >= 0)) throw Error(ErrorKind::BadArgument, "tol must be non-negative");
}

Model resolve_model(const Common& o, const ModelParams& p) {
    if (o.model.empty()) return infer_model(p);
    if (o.model == "all") throw Error(ErrorKind::BadArgument, "model 'all' is only valid with verify --random");
    auto m = parse_model(o.model);
    if (!m) throw Error(ErrorKind::BadArgument, "unknown model '" + o.model + "'");
    return *m;
}

ModelParams load(const Common& o, Model* m) {
    ModelParams p = o.params.empty() ? demo_params() : params_from_file(o.params);
    *m = resolve_model(o, p);
    p = prepare_params(*m, p);
    validate_params(p);
    return p;
}

// Round-trip precision, '.' decimal point regardless of locale.
std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    for (char* c = buf; *c; ++c)
        if (*c == ',') *c = '.';
    return buf;
}

json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json thresholds_json(const std::vector<Threshold>& v) {
    json j = json::object();
    for (auto& t : v) j[t.name] = jnum(t.value);
    return j;
}

json profile_json(const ModelParams& p, const EquilibriumProfile& eq) {
    json j;
    j["model"] = model_name(eq.model);
    j["regime"] = regime_name(eq.regime);
    j["status"] = status_name(eq.status);
    j["expert"] = {{"t_m1", eq.expert.t_m1}, {"t_s1", eq.expert.t_s1}, {"t_m2", eq.expert.t_m2}, {"t_s2", eq.expert.t_s2}};
    j["consumer"] = {
        {"a_m1", eq.consumer.a_m1}, {"a_s1", eq.consumer.a_s1}, {"a_m2", eq.consumer.a_m2}, {"a_s2", eq.consumer.a_s2}};
    j["thresholds"] = thresholds_json(eq.thresholds);
    j["extras"] = thresholds_json(eq.extras);
    j["boundary_flag"] = eq.boundary_flag;
    j["requires_oracle"] = eq.requires_oracle;
    json d = json::array();
    for (auto& x : eq.discrepancies) d.push_back({{"formula", x.formula}, {"detail", x.detail}});
    j["paper_discrepancies"] = d;
    j["notes"] = eq.notes;
    auto out = profile_outcome(p, eq);
    j["outcomes"] = {{"profit", jnum(out.profit)}, {"welfare", jnum(out.welfare)},
                     {"method", out.analytic ? "closed_form" : "payoff_tree"}};
    j["params"] = params_to_json(p);
    return j;
}

void write_atomic(const std::string& path, const std::string& body) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
        f << body;
        f.flush();
        if (!f) {
            f.close();
            std::error_code ec;
            fs::remove(tmp, ec);
            throw Error(ErrorKind::Io, "short write to '" + path + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorKind::Io, "cannot rename onto '" + path + "'");
    }
}

template <class F>
void parallel_for(size_t n, int jobs, F&& f) {
    if (jobs <= 1 || n < 2) {
        for (size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(jobs);
    for (int w = 0; w < jobs; ++w)
        pool.emplace_back([&, w] {
            try {
                for (size_t i = w; i < n; i += jobs) f(i);
            } catch (...) {
                errs[w] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

// solve ----------------------------------------------------------------------

int cmd_solve(const Common& o) {
    check_tol(o.tol);
    Model m;
    ModelParams p = load(o, &m);
    auto eq = solve(m, p, o.tol);
    std::cout << profile_json(p, eq).dump(2) << "\n";
    return 0;
}

// sweep ----------------------------------------------------------------------

struct Axis {
    std::string name;
    double start = 0, end = 0;
    int n = 0;
    double at(int i) const { return n == 1 ? start : start + (end - start) * i / (n - 1); }
};

Axis parse_axis(const std::string& s) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::BadArgument, "grid axis '" + s + "' is not param=start:end:n");
    Axis a;
    a.name = s.substr(0, eq);
    if (!has_numeric_field(a.name)) throw Error(ErrorKind::BadArgument, "unknown grid parameter '" + a.name + "'");
    std::string rest = s.substr(eq + 1);
    std::vector<std::string> parts;
    std::stringstream ss(rest);
    for (std::string t; std::getline(ss, t, ':');) parts.push_back(t);
    if (parts.size() != 3) throw Error(ErrorKind::BadArgument, "grid axis '" + s + "' is not param=start:end:n");
    try {
        size_t used = 0;
        a.start = std::stod(parts[0], &used);
        if (used != parts[0].size()) throw std::invalid_argument("start");
        a.end = std::stod(parts[1], &used);
        if (used != parts[1].size()) throw std::invalid_argument("end");
        a.n = std::stoi(parts[2], &used);
        if (used != parts[2].size()) throw std::invalid_argument("n");
    } catch (const std::logic_error&) {
        throw Error(ErrorKind::BadArgument, "grid axis '" + s + "' has a malformed number");
    }
    if (a.n < 1) throw Error(ErrorKind::BadArgument, "grid axis '" + a.name + "' needs n >= 1");
    return a;
}

struct Row {
    double mu, h;
    Regime regime;
    ExpertStrategy e;
    ConsumerStrategy c;
    double profit, welfare;
    bool boundary;
};

int cmd_sweep(const Common& o, const std::vector<std::string>& grid, const std::string& out, const std::string& format) {
    check_tol(o.tol);
    if (grid.empty() || grid.size() > 2) throw Error(ErrorKind::BadArgument, "sweep takes one or two --grid axes");
    std::vector<Axis> axes;
    for (auto& g : grid) axes.push_back(parse_axis(g));
    if (axes.size() == 2 && axes[0].name == axes[1].name)
        throw Error(ErrorKind::BadArgument, "grid axes must be distinct");
    bool single = true;
    for (auto& a : axes) single = single && a.n == 1;
    if (!single)
        for (auto& a : axes)
            if (a.n < 2) throw Error(ErrorKind::BadArgument, "grid axis '" + a.name + "' needs n >= 2");
    if (format != "csv" && format != "json") throw Error(ErrorKind::BadArgument, "format must be csv or json");

    Model m;
    ModelParams base = load(o, &m);
    const int n0 = axes[0].n, n1 = axes.size() == 2 ? axes[1].n : 1;
    std::vector<Row> rows(static_cast<size_t>(n0) * n1);
    parallel_for(rows.size(), o.jobs, [&](size_t idx) {
        int i = static_cast<int>(idx / n1), j = static_cast<int>(idx % n1);
        ModelParams p = base;
        set_field(p, axes[0].name, axes[0].at(i));
        if (axes.size() == 2) set_field(p, axes[1].name, axes[1].at(j));
        auto v = param_violations(p);
        if (!v.empty()) {
            std::ostringstream msg;
            msg << "grid cell " << axes[0].name << "=" << num(axes[0].at(i));
            if (axes.size() == 2) msg << " " << axes[1].name << "=" << num(axes[1].at(j));
            msg << " violates " << v.front();
            throw Error(ErrorKind::InvalidParam, msg.str());
        }
        auto eq = solve(m, p, o.tol);
        auto r = profile_outcome(p, eq);
        rows[idx] = {p.mu, p.h, eq.regime, eq.expert, eq.consumer, r.profit, r.welfare, eq.boundary_flag};
    });

    std::string body;
    if (format == "csv") {
        body = "mu,h,regime,t_m1,t_s1,a_m1,a_s1,profit,welfare,boundary_flag\n";
        for (auto& r : rows) {
            body += num(r.mu) + "," + num(r.h) + "," + std::string(regime_name(r.regime)) + "," + num(r.e.t_m1) + "," +
                    num(r.e.t_s1) + "," + num(r.c.a_m1) + "," + num(r.c.a_s1) + "," + num(r.profit) + "," +
                    num(r.welfare) + "," + (r.boundary ? "1" : "0") + "\n";
        }
    } else {
        json arr = json::array();
        for (auto& r : rows)
            arr.push_back({{"mu", r.mu},
                           {"h", r.h},
                           {"regime", regime_name(r.regime)},
                           {"t_m1", r.e.t_m1},
                           {"t_s1", r.e.t_s1},
                           {"a_m1", r.c.a_m1},
                           {"a_s1", r.c.a_s1},
                           {"profit", jnum(r.profit)},
                           {"welfare", jnum(r.welfare)},
                           {"boundary_flag", r.boundary}});
        body = arr.dump(1) + "\n";
    }
    if (out.empty() || out == "-")
        std::cout << body;
    else
        write_atomic(out, body);
    return 0;
}

// verify ---------------------------------------------------------------------

bool parse_profile(const std::string& s, double v[4]) {
    std::string t;
    for (char c : s)
        if (c != '(' && c != ')' && c != ' ') t += c;
    std::stringstream ss(t);
    int n = 0;
    for (std::string x; std::getline(ss, x, ',');) {
        if (n == 4) return false;
        try {
            size_t used = 0;
            v[n] = std::stod(x, &used);
            if (used != x.size()) return false;
        } catch (const std::logic_error&) {
            return false;
        }
        if (!(v[n] >= 0 && v[n] <= 1)) return false;
        ++n;
    }
    return n == 4;
}

json failure_json(const ModelParams& p, const EquilibriumProfile& eq, const oracle::VerificationReport& r) {
    return {{"params", params_to_json(p)},
            {"regime", regime_name(eq.regime)},
            {"max_gain", r.max_gain},
            {"witness_set", r.witness_set},
            {"witness_action", r.witness_action}};
}

struct Battery {
    int certified = 0, declined = 0;
    double worst = 0;
    bool failed = false;
    json failure;
};

// Declined draws are those where the model has no closed-form profile to
// certify (NONE, or a precondition such as EpsilonTooLarge).
Battery run_battery(Model m, int n, std::uint64_t seed, double tol) {
    Battery b;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < n; ++i) {
        // resentment draws alternate known and hidden history
        ModelParams p = sample_params(m, rng, m == Model::resentment && (i % 2 == 1));
        EquilibriumProfile eq;
        try {
            eq = solve(m, p, tol);
        } catch (const Error& e) {
            if (exit_code_for(e.kind()) == 3) {
                ++b.declined;
                continue;
            }
            throw;
        }
        if (eq.regime == Regime::NONE) {
            ++b.declined;
            continue;
        }
        auto r = oracle::verify_equilibrium(p, eq, tol);
        b.worst = std::max(b.worst, r.max_gain);
        if (!r.is_equilibrium) {
            b.failed = true;
            b.failure = failure_json(p, eq, r);
            b.failure["draw"] = i;
            return b;
        }
        ++b.certified;
    }
    return b;
}

int cmd_verify(const Common& o, int random, std::uint64_t seed, const std::string& profile) {
    check_tol(o.tol);
    if (random > 0) {
        std::vector<Model> models;
        if (o.model == "all") {
            models.assign(std::begin(kAllModels), std::end(kAllModels));
        } else {
            auto m = parse_model(o.model.empty() ? "base" : o.model);
            if (!m) throw Error(ErrorKind::BadArgument, "unknown model '" + o.model + "'");
            models.push_back(*m);
        }
        json summary = json::array();
        int rc = 0;
        for (Model m : models) {
            Battery b = run_battery(m, random, seed, o.tol);
            json j = {{"model", model_name(m)},
                      {"draws", random},
                      {"certified", b.certified},
                      {"declined", b.declined},
                      {"worst_gain", b.worst}};
            if (b.failed) {
                j["failure"] = b.failure;
                rc = 1;
            }
            summary.push_back(j);
            if (b.failed) break;
        }
        json out = {{"seed", seed}, {"tol", o.tol}, {"convention", oracle::VerificationReport{}.convention},
                    {"results", summary}};
        std::cout << out.dump(2) << "\n";
        return rc;
    }

    Model m;
    ModelParams p = load(o, &m);
    EquilibriumProfile eq = solve(m, p, o.tol);
    oracle::VerificationReport r;
    if (!profile.empty()) {
        double v[4];
        if (!parse_profile(profile, v))
            throw Error(ErrorKind::BadArgument, "profile must be (t_m1,t_s1,a_m1,a_s1) with entries in [0,1]");
        eq.expert.t_m1 = v[0];
        eq.expert.t_s1 = v[1];
        eq.consumer.a_m1 = v[2];
        eq.consumer.a_s1 = v[3];
        eq.regime = regime_of(eq.expert, eq.consumer);
        r = oracle::verify_equilibrium(m, p, eq.expert, eq.consumer, o.tol);
    } else if (eq.regime == Regime::NONE) {
        json out = {{"model", model_name(m)}, {"regime", "NONE"}, {"status", status_name(eq.status)},
                    {"certified", false}, {"detail", "no closed-form profile at this point"}};
        std::cout << out.dump(2) << "\n";
        return 0;
    } else {
        r = oracle::verify_equilibrium(p, eq, o.tol);
    }
    json out = {{"model", model_name(m)},
                {"regime", regime_name(eq.regime)},
                {"is_equilibrium", r.is_equilibrium},
                {"max_gain", r.max_gain},
                {"witness_set", r.witness_set},
                {"witness_action", r.witness_action},
                {"convention", r.convention}};
    if (!r.is_equilibrium) out["params"] = params_to_json(p);
    std::cout << out.dump(2) << "\n";
    return r.is_equilibrium ? 0 : 1;
}

// simulate -------------------------------------------------------------------

json moment_json(double mean, const std::optional<double>& se, double analytic) {
    json j = {{"mean", mean}, {"se", se ? json(*se) : json(nullptr)}, {"analytic", jnum(analytic)}};
    if (se && *se > 0 && std::isfinite(analytic))
        j["delta_se"] = (mean - analytic) / *se;
    else
        j["delta_se"] = nullptr;
    return j;
}

int cmd_simulate(const Common& o, std::uint64_t n, std::uint64_t seed) {
    check_tol(o.tol);
    if (n < 1) throw Error(ErrorKind::BadArgument, "n must be at least 1");
    Model m;
    ModelParams p = load(o, &m);
    auto eq = solve(m, p, o.tol);
    if (eq.regime == Regime::NONE)
        throw Error(ErrorKind::NoEquilibriumFound,
                    "no closed-form profile to simulate (" + std::string(status_name(eq.status)) + ")");
    auto analytic = profile_outcome(p, eq);
    auto s = oracle::simulate_market(m, p, eq.expert, eq.consumer, n, seed, o.jobs);
    json out = {{"model", model_name(m)},
                {"regime", regime_name(eq.regime)},
                {"seed", s.seed},
                {"n_consumers", s.n_consumers},
                {"n_opportunistic_first", s.n_opportunistic_first},
                {"profit", moment_json(s.profit_mean, s.profit_se, analytic.profit)},
                {"welfare", moment_json(s.welfare_mean, s.welfare_se, analytic.welfare)},
                {"rates",
                 {{"overtreatment", s.over_rate},
                  {"undertreatment", s.under_rate},
                  {"return", s.return_rate},
                  {"search", s.search_rate}}}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"credence-service market equilibrium engine"};
    app.require_subcommand(1);

    Common solve_o, sweep_o, verify_o, sim_o;
    auto* s = app.add_subcommand("solve", "equilibrium profile and outcomes at one point");
    add_common(s, solve_o);

    std::vector<std::string> grid;
    std::string out, format = "csv";
    auto* w = app.add_subcommand("sweep", "regime map over one or two parameter axes");
    add_common(w, sweep_o);
    w->add_option("--grid", grid, "param=start:end:n, endpoints included")->required();
    w->add_option("--out", out, "output file (stdout when omitted)");
    w->add_option("--format", format, "csv or json");

    int random = 0;
    std::uint64_t vseed = 0;
    std::string profile;
    auto* v = app.add_subcommand("verify", "certify closed-form profiles against the payoff tree");
    add_common(v, verify_o);
    v->add_option("--random", random, "number of random draws");
    v->add_option("--seed", vseed, "seed for the random draws");
    v->add_option("--profile", profile, "(t_m1,t_s1,a_m1,a_s1) to certify instead of the closed form");

    std::uint64_t n = 100000, sseed = 0;
    auto* m = app.add_subcommand("simulate", "Monte Carlo market at the closed-form profile");
    add_common(m, sim_o);
    m->add_option("--n", n, "number of consumers");
    m->add_option("--seed", sseed, "simulation seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*s) return cmd_solve(solve_o);
        if (*w) return cmd_sweep(sweep_o, grid, out, format);
        if (*v) return cmd_verify(verify_o, random, vseed, profile);
        if (*m) return cmd_simulate(sim_o, n, sseed);
    } catch (const Error& e) {
        std::cerr << "error: " << error_kind_name(e.kind()) << ": " << e.detail() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
