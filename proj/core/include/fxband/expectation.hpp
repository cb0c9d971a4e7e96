/**
 * @file expectation.hpp
 * @brief Intervention operator ingredients for a band policy.
 *
 * After an intervention resets the rate to alpha, a reaction window of random
 * length T opens during which the rate follows GBM(mu2, sigma2). The value of
 * restarting at alpha is
 *
 *   K + E[Ktilde(alpha)] + E[exp(-r T) V(X_alpha(T))],
 *
 * where V equals phi on (a, b) and the constant theta outside. The outer
 * expectation over (T, sigma2, mu2) is a finite node sum; the inner lognormal
 * expectation is Gauss-Legendre in log-x on (a, b) plus exact tail masses.
 */

#pragma once

#include "fxband/model.hpp"
#include "fxband/reaction.hpp"

#include <vector>

namespace fxband {

inline constexpr int kDefaultInnerPoints = 200;
inline constexpr int kDefaultReactionQuadrature = 32;

struct CostSpec {
    double k_fixed = 0.0;

    void validate() const;
};

struct ReactionNode {
    double t = 0.0;       ///< window length
    double sigma2 = 0.0;  ///< volatility during the window
    double mu2 = 0.0;     ///< drift during the window
    double weight = 0.0;
};

struct ReactionNodes {
    std::vector<ReactionNode> nodes;

    double total_weight() const;
};

/// Joint nodes of (T, sigma + sigma_shift, mu + mu_shift) as a product of the
/// three marginals. Uniform marginals use `n_quad` Gauss-Legendre points.
ReactionNodes build_nodes(const ReactionLaw& law, const ModelParams& params,
                          int n_quad = kDefaultReactionQuadrature);

/// Candidate value function on a band: phi on (a, b), theta outside.
struct BandValue {
    double a = 0.0;
    double b = 0.0;
    double theta = 0.0;
    ValueCoeffs coeffs;

    /// Piecewise extension: phi(x) for a < x < b, theta otherwise.
    double value(double x) const;
    double derivative(double x) const;
};

/// E[exp(-r T) V(X_alpha(T))].
double expected_phi_after(const BandValue& band, double alpha, const ReactionNodes& nodes,
                          const ModelParams& params, int n_inner = kDefaultInnerPoints);

/// d/d alpha of expected_phi_after, from the alpha-derivative of the density.
double d_dalpha_expected_phi_after(const BandValue& band, double alpha,
                                   const ReactionNodes& nodes, const ModelParams& params,
                                   int n_inner = kDefaultInnerPoints);

struct AfterTerms {
    double value = 0.0;
    double d_alpha = 0.0;
};

/// Both of the above in a single pass over the nodes.
AfterTerms expected_phi_after_terms(const BandValue& band, double alpha, const ReactionNodes& nodes,
                                    const ModelParams& params, int n_inner = kDefaultInnerPoints);

/// E[Ktilde(alpha)] and its alpha-derivative.
double expected_ktilde(double alpha, const ReactionNodes& nodes, const ModelParams& params);
double expected_ktilde_dx(double alpha, const ReactionNodes& nodes, const ModelParams& params);

/// K + E[Ktilde(alpha)] + E[exp(-r T) V(X_alpha(T))]. Independent of the
/// pre-intervention state under fixed costs.
double intervention_value(const BandValue& band, double alpha, const ReactionNodes& nodes,
                          const CostSpec& cost, const ModelParams& params,
                          int n_inner = kDefaultInnerPoints);

}  // namespace fxband
