#pragma once

#include "fxband/expectation.hpp"
#include "fxband/model.hpp"
#include "fxband/reaction.hpp"
#include "fxband/simulator.hpp"
#include "fxband/solver.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace fxband::cli {

using json = nlohmann::ordered_json;

/// Everything a command needs, as read from a JSON file.
///
///   {
///     "model":    {"mu": 0.1, "sigma": 0.3, "r": 0.06, "rho": 1.4},
///     "reaction": {"T": 1.0, "sigma_shift": {"type": "point", "value": 0.1}},
///     "cost":     {"K": 0.5},
///     "solver":   {...SolverConfig fields...},
///     "sim":      {...SimConfig fields...}
///   }
///
/// "model" and "cost" are required. A law is either a number (point mass) or
/// an object with "type" point / uniform / discrete. Unknown keys are errors.
struct ProblemConfig {
    ModelParams model;
    ReactionLaw reaction;
    CostSpec cost;
    SolverConfig solver;
    SimConfig sim;
};

/// Throws InvalidParameter with a path-qualified message on any schema or
/// invariant violation.
ProblemConfig parse_config(const json& j);
ProblemConfig load_config(const std::string& path);

json to_json(const ScalarLaw& law);
json to_json(const ProblemConfig& cfg);

/// {A, B, a, b, alpha, theta, residual_norm, checks{...}}
json solution_to_json(const PolicySolution& sol);

/// Inverse of solution_to_json for the fields needed to rebuild the value
/// function; `checks` and `residual_norm` are optional. Coefficients are
/// rebuilt from `model`.
PolicySolution solution_from_json(const json& j, const ModelParams& model);
PolicySolution load_solution(const std::string& path, const ModelParams& model);

json checks_to_json(const VerificationReport& report);
json estimate_to_json(const CostEstimate& est);

}  // namespace fxband::cli
