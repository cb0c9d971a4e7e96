/**
 * @file solver.hpp
 * @brief Free-boundary solve for the optimal intervention band.
 *
 * Unknowns are (A, B, a, b, alpha). The five equations are
 *
 *   phi(a) = K + E[Ktilde(alpha)] + E[exp(-rT) V(X_alpha(T))]   (value matching)
 *   phi(b) = phi(a)
 *   phi'(a) = 0, phi'(b) = 0                                    (smooth pasting)
 *   d/d alpha (E[Ktilde(alpha)] + E[exp(-rT) V(X_alpha(T))]) = 0 (optimal restart)
 *
 * with V built from the trial unknowns and theta = phi(a). The system is
 * solved by damped Newton with a central-difference Jacobian in the
 * coordinates (A, B, log a, log(alpha - a), log(b - alpha)), which keep the
 * ordering 0 < a < alpha < b without constraints.
 */

#pragma once

#include "fxband/expectation.hpp"
#include "fxband/model.hpp"
#include "fxband/reaction.hpp"

#include <array>
#include <optional>
#include <vector>

namespace fxband {

struct SolverConfig {
    double tol_residual = 1e-9;
    int max_iter = 100;
    double fd_step = 1e-6;
    int n_inner = kDefaultInnerPoints;
    int n_quad = kDefaultReactionQuadrature;
    int homotopy_steps = 4;

    void validate() const;
};

struct Unknowns {
    double A = 0.0;
    double B = 0.0;
    double a = 0.0;
    double b = 0.0;
    double alpha = 0.0;
};

using Residuals = std::array<double, 5>;

double residual_norm(const Residuals& res);

/// Residual system for one problem instance.
class FreeBoundarySystem {
public:
    FreeBoundarySystem(ModelParams params, CostSpec cost, ReactionNodes nodes,
                       int n_inner = kDefaultInnerPoints);

    /// [phi(a) - intervention value, phi(b) - phi(a), phi'(a), phi'(b),
    ///  d/d alpha (E Ktilde + E exp(-rT) V)]. Throws DomainViolation unless
    /// 0 < a < alpha < b.
    Residuals residuals(const Unknowns& u) const;

    BandValue band(const Unknowns& u) const;

    const ModelParams& params() const noexcept { return params_; }
    const CostSpec& cost() const noexcept { return cost_; }
    const ReactionNodes& nodes() const noexcept { return nodes_; }
    int n_inner() const noexcept { return n_inner_; }

private:
    ModelParams params_;
    CostSpec cost_;
    ReactionNodes nodes_;
    int n_inner_;
    GammaRoots gammas_;
    ParticularCoeffs particular_;
};

struct Check {
    bool pass = false;
    double margin = 0.0;  ///< positive when the check holds with room
};

/// Sufficient conditions for the band policy to be optimal, with margins.
struct VerificationReport {
    Check cond_lower;       ///< a < rho - sqrt(r theta)
    Check cond_upper;       ///< b > rho + sqrt(r theta)
    Check value_at_alpha;   ///< phi(alpha) < theta
    Check ode_residual;     ///< |L phi + f| small on a grid of (a, b); margin = tol - max
    Check outside_band;     ///< -r theta + (x - rho)^2 >= 0 outside (a, b)
    Check below_theta;      ///< phi(x) <= theta + tol on (a, b)
    Check smooth_pasting;   ///< |phi'(a)|, |phi'(b)| < tol

    bool all_pass() const;
};

struct VerifyTolerances {
    double ode_residual = 1e-6;
    double below_theta = 1e-8;
    double smooth_pasting = 1e-9;
    int band_points = 10000;
    int outside_points = 1000;
};

struct PolicySolution {
    ValueCoeffs coeffs;
    double a = 0.0;
    double b = 0.0;
    double alpha = 0.0;
    double theta = 0.0;
    double residual_norm = 0.0;
    int iterations = 0;
    VerificationReport verified;

    Unknowns unknowns() const { return {coeffs.a_coef, coeffs.b_coef, a, b, alpha}; }
};

/// Baseline without market reaction (T = 0).
PolicySolution solve_t0(const ModelParams& params, const CostSpec& cost,
                        const SolverConfig& config = {});

/// Full problem. Newton is started from `initial` when given, otherwise from
/// the T = 0 baseline; on failure the reaction window is ramped up from zero
/// over `homotopy_steps` warm-started stages.
PolicySolution solve(const ModelParams& params, const CostSpec& cost, const ReactionLaw& law,
                     const SolverConfig& config = {},
                     const std::optional<Unknowns>& initial = std::nullopt);

/// Damped Newton on a given system from a given start.
PolicySolution newton_solve(const FreeBoundarySystem& system, const Unknowns& start,
                            const SolverConfig& config);

VerificationReport verify(const PolicySolution& sol, const FreeBoundarySystem& system,
                          const VerifyTolerances& tol = {});

/// phi on [a, b], theta outside.
double value_function(const PolicySolution& sol, double x);

/// T = 0 cost K whose baseline band best matches (target_a, target_b) in
/// least squares, searched over [k_lo, k_hi].
struct CostCalibration {
    double k_fixed = 0.0;
    PolicySolution solution;
};

CostCalibration match_band_with_cost(const ModelParams& params, double target_a, double target_b,
                                     double k_lo, double k_hi, const SolverConfig& config = {});

}  // namespace fxband
