#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace credence {

inline constexpr double kDefaultTol = 1e-9;

// Posterior used when a recommendation arm has probability zero: the
// recommendation is taken to be truthful.
inline constexpr double kOffPathTruthful = 1.0;

// TOL, or CREDENCE_TOL from the environment when set and parseable.
double default_tol();

enum class Model {
    base,
    epsilon,
    capacity,
    hidden_history,
    alt_contract,
    delta,
    resentment,
    heterogeneity,
    endogenous_price,
};

inline constexpr Model kAllModels[] = {
    Model::base,       Model::epsilon,    Model::capacity,
    Model::hidden_history, Model::alt_contract, Model::delta,
    Model::resentment, Model::heterogeneity, Model::endogenous_price,
};

std::string_view model_name(Model m);
std::optional<Model> parse_model(std::string_view s);

enum class ErrorKind {
    InvalidParam,
    Schema,
    BadArgument,
    ZeroProbabilityEvent,
    EmptyFOPURegion,
    BoundaryAmbiguity,
    RegimeMismatch,
    RegimeCrossing,
    UndefinedThreshold,
    DegenerateStep,
    EpsilonTooLarge,
    NotResentment,
    ResentmentRegime,
    NoEquilibriumFound,
    Io,
};

std::string_view error_kind_name(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string detail);
    ErrorKind kind() const noexcept { return kind_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

// CLI exit code for an error kind: 2 input, 3 model precondition, 4 I/O.
int exit_code_for(ErrorKind k);

struct ModelParams {
    double h = 0.5;
    double mu = 0.5;
    double l_m = 6;
    double l_s = 10;
    double p_m = 2;
    double p_s = 5;
    double c_m = 1;
    double c_s = 2;
    double k = 1;
    double k_return = 0;

    std::optional<double> epsilon;
    std::optional<double> chi;
    std::optional<double> delta;
    std::optional<double> alpha;
    bool hidden_history = false;
    bool resentment = false;
    bool alt_contract = false;
    bool endogenous_price = false;

    double margin_m() const { return p_m - c_m; }
    double margin_s() const { return p_s - c_s; }
    double spread() const { return p_s - p_m; }
    // p_m + k' - k, the quantity whose sign decides whether FOPU can occur.
    double x_return() const { return p_m + k_return - k; }
};

// The parameter values behind the regime map figure; h and mu are free.
ModelParams demo_params(double h = 0.5, double mu = 0.5);

struct ExpertStrategy {
    double t_m1 = 0;
    double t_s1 = 0;
    double t_m2 = 0;
    double t_s2 = 1;
};

struct ConsumerStrategy {
    double a_m1 = 1;
    double a_s1 = 1;
    double a_m2 = 1;
    double a_s2 = 1;
};

struct Beliefs {
    double tbar_s = 1;
    double tbar_m = 1;
    double tau_m = 1;
    double tau_s = 1;
};

// Names of every violated constraint; empty when valid. The k > k' ordering
// flips to k' > k when the resentment flag is set.
std::vector<std::string> param_violations(const ModelParams& p);
const ModelParams& validate_params(const ModelParams& p);

std::pair<double, double> expected_truthfulness(const ModelParams& p, const ExpertStrategy& e);

// off_path is the posterior used for a zero-probability arm; nullopt makes
// such an arm an error instead.
Beliefs posterior_beliefs(const ModelParams& p, const ExpertStrategy& e,
                          std::optional<double> off_path = kOffPathTruthful);

inline double clamp01(double x) { return x < 0 ? 0 : (x > 1 ? 1 : x); }

}  // namespace credence
