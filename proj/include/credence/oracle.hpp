#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "credence/core.hpp"
#include "credence/equilibrium.hpp"

namespace credence::oracle {

// Recommendation index; kRefuse is an honest expert turning a serious
// problem away (capacity shock, low capability).
enum Rec : int { kMinor = 0, kSerious = 1, kRefuse = 2 };

enum OutcomeFlag : unsigned {
    kOvertreated = 1u,
    kUndertreated = 2u,
    kReturned = 4u,
    kSearched = 8u,
};

struct Outcome {
    double prob = 0;
    double consumer = 0;  // consumer payoff after the first search cost
    double profit = 0;    // profit of the first expert
    unsigned flags = 0;
};
using Lottery = std::vector<Outcome>;

struct Cell {
    double prob = 0;
    int theta = 0;  // 0 minor, 1 serious
    bool opportunistic = false;
    bool free = false;  // an opportunistic expert whose recommendation is a choice
    int sub = 0;        // diagnosis (epsilon), shocked (capacity), high capability (alpha)
    std::array<double, 3> rec{};
};

struct SecondCell {
    double prob = 0;
    std::array<double, 3> rec{};
};

// Explicit game tree of one model at fixed strategies. Beliefs anywhere in
// the tree come from enumerating these cells, never from closed forms.
class PayoffTree {
public:
    PayoffTree(Model m, const ModelParams& p, const ExpertStrategy& e, const ConsumerStrategy& c);

    Model model() const { return model_; }
    const ModelParams& params() const { return q_; }  // prices as traded
    const ExpertStrategy& expert() const { return e_; }
    const ConsumerStrategy& consumer() const { return c_; }
    bool hidden() const { return hidden_; }

    const std::vector<Cell>& cells() const { return cells_; }
    const std::vector<SecondCell>& second(int theta) const { return second_[theta]; }

    double acceptance(int rec) const { return rec == kMinor ? c_.a_m1 : c_.a_s1; }
    // Second-visit minor acceptance after rejecting `rec`: a_m2 when that
    // rejection is on path, the optimal reply otherwise.
    double second_minor_accept(int rec) const { return x_[rec]; }
    bool rejection_on_path(int rec) const { return on_path_[rec]; }

    Lottery accept_lottery(int theta, int sub, int rec) const;
    const Lottery& first_lottery(size_t cell, int rec) const { return accept_[cell][rec]; }
    const Lottery& reject_lottery(int theta, int rec) const { return reject_[theta][rec]; }

    // Expected consumer value of the second visit for a plan.
    double second_visit_value(int theta, double accept_minor, double accept_serious) const;
    double second_minor_prob(int theta) const;
    double second_serious_prob(int theta) const;

    // Discovered undertreatment: 0 return, 1 search, 2 bear the loss.
    int undertreated_choice() const { return uchoice_; }
    double tau_h() const { return tau_h_; }
    bool refused_search() const { return refuse_search_; }

private:
    void build_cells();
    void build_second();
    void decide_undertreated();
    void decide_second_visit();
    Lottery refusal_lottery() const;
    Lottery reject_lottery_build(int theta, int rec) const;

    Model model_;
    ModelParams q_;
    ExpertStrategy e_;
    ConsumerStrategy c_;
    bool hidden_ = false;
    std::vector<Cell> cells_;
    std::array<std::vector<SecondCell>, 2> second_;
    std::vector<std::array<Lottery, 3>> accept_;
    std::array<std::array<Lottery, 2>, 2> reject_;
    std::array<double, 2> x_{1, 1};
    std::array<bool, 2> on_path_{false, false};
    int uchoice_ = 0;
    double tau_h_ = 0;
    bool refuse_search_ = true;
};

inline constexpr int kMaxActions = 6;

struct InfoSet {
    const char* who = "";
    const char* name = "";
    double reach = 0;
    bool off_path = false;
    int n = 0;
    std::array<const char*, kMaxActions> actions{};
    std::array<double, kMaxActions> values{};
    double played = 0;  // value of the profile's own (possibly mixed) action

    double best() const;
    int best_action() const;
    double gain() const { return best() - played; }
};

struct TreeEval {
    std::vector<InfoSet> sets;
    double welfare = 0;  // includes the first search cost
    double profit = 0;   // per consumer whose first expert is opportunistic
    double over_rate = 0;
    double under_rate = 0;
    double return_rate = 0;
    double search_rate = 0;
    double tau_m = 1;
    double tau_s = 1;
    double gamma_m = 1, gamma_s = 1, gamma_mm = 0, gamma_sm = 0;
    double tau_h = 0;

    const InfoSet* find(const char* name) const;
    // accept minus the best rejection plan at a first-visit consumer set
    double consumer_margin(int rec) const;
};

TreeEval evaluate(const PayoffTree& t);
TreeEval evaluate(Model m, const ModelParams& p, const ExpertStrategy& e, const ConsumerStrategy& c);

enum class Reply { Accept, Reject, Truthful, Fraud, Indifferent };
const char* reply_name(Reply r);

struct BestResponses {
    Reply consumer_minor = Reply::Indifferent;
    Reply consumer_serious = Reply::Indifferent;
    Reply expert_minor = Reply::Indifferent;
    Reply expert_serious = Reply::Indifferent;
};

// Each side's pure best reply against the other side's strategy.
BestResponses best_responses(Model m, const ModelParams& p, const ExpertStrategy& e,
                             const ConsumerStrategy& c, double tol = default_tol());

struct VerificationReport {
    bool is_equilibrium = false;
    double max_gain = 0;
    std::string witness_set;
    std::string witness_action;
    std::string convention = "off-path recommendation treated as truthful (tau = 1)";
};

VerificationReport verify_equilibrium(Model m, const ModelParams& p, const ExpertStrategy& e,
                                      const ConsumerStrategy& c, double tol = default_tol());
VerificationReport verify_equilibrium(const ModelParams& p, const EquilibriumProfile& eq,
                                      double tol = default_tol());

// Support enumeration with bisection on the binding indifference
// conditions; returns every certified profile, deduplicated.
std::vector<EquilibriumProfile> find_equilibria_grid(Model m, const ModelParams& p, int grid_n,
                                                     double tol = default_tol());

struct SimulationResult {
    std::uint64_t n_consumers = 0;
    std::uint64_t n_opportunistic_first = 0;
    std::uint64_t seed = 0;
    double profit_mean = 0;
    std::optional<double> profit_se;
    double welfare_mean = 0;
    std::optional<double> welfare_se;
    double over_rate = 0;
    double under_rate = 0;
    double return_rate = 0;
    double search_rate = 0;
};

// Counter-based stream: splitmix64 of (seed, consumer index, draw index).
std::uint64_t splitmix64(std::uint64_t x);
double uniform01(std::uint64_t seed, std::uint64_t index, std::uint64_t draw);

inline constexpr std::uint64_t kSimBlock = 4096;

SimulationResult simulate_market(Model m, const ModelParams& p, const ExpertStrategy& e,
                                 const ConsumerStrategy& c, std::uint64_t n_consumers,
                                 std::uint64_t seed, int jobs = 1);

}  // namespace credence::oracle
