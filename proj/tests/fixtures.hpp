#pragma once

#include "fxband/solver.hpp"

namespace fixtures {

// Numerical example used throughout: rho = 1.4, r = 0.06, mu = 0.1, sigma = 0.3.
inline fxband::ModelParams base_params() { return {0.1, 0.3, 0.06, 1.4}; }
inline fxband::CostSpec base_cost() { return {0.5}; }
// One unit of time at volatility 0.4.
inline fxband::ReactionLaw vol_up_law() { return fxband::ReactionLaw::fixed(1.0, 0.1, 0.0); }

inline const fxband::PolicySolution& t0_solution() {
    static const auto sol = fxband::solve_t0(base_params(), base_cost());
    return sol;
}

inline const fxband::PolicySolution& t1_solution() {
    static const auto sol = fxband::solve(base_params(), base_cost(), vol_up_law());
    return sol;
}

inline fxband::BandValue band_of(const fxband::PolicySolution& sol) {
    return {sol.a, sol.b, sol.theta, sol.coeffs};
}

}  // namespace fixtures
