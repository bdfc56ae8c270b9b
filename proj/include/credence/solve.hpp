#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "credence/core.hpp"
#include "credence/equilibrium.hpp"

namespace credence {

// Model implied by the knobs present; Schema error when more than one
// variant is switched on.
Model infer_model(const ModelParams& p);

// Checks that p carries what model m needs (Schema error naming the
// missing key) and sets the model's flag.
ModelParams prepare_params(Model m, const ModelParams& p);

EquilibriumProfile solve(Model m, const ModelParams& p, double tol = default_tol());

struct ProfileOutcome {
    double profit = 0;
    double welfare = 0;
    bool analytic = false;  // closed form rather than tree evaluation
};
// NaN for NONE profiles.
ProfileOutcome profile_outcome(const ModelParams& p, const EquilibriumProfile& eq);

// A random valid parameter point for model m (knobs included).
ModelParams sample_params(Model m, std::mt19937_64& rng, bool hidden_resentment = false);

// Uniform on [0, 1) from the top 53 bits, independent of the library's
// distribution implementation.
inline double u01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace credence
