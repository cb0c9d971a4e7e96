/**
 * @file model.hpp
 * @brief Closed-form primitives for the band-controlled exchange rate.
 *
 * The uncontrolled rate is a geometric Brownian motion
 *   dX = mu X dt + sigma X dW
 * with running cost f(x) = (x - rho)^2 discounted at rate r. On the
 * continuation region the candidate value function solves
 *   L phi + f = 0,   L phi = 1/2 sigma^2 x^2 phi'' + mu x phi' - r phi,
 * whose general solution is
 *   phi(x) = A x^g1 + B x^g2 + c2 x^2 + c1 x + c0.
 */

#pragma once

namespace fxband {

/// Guard on |r - mu| and |r - sigma^2 - 2 mu|.
inline constexpr double kDenominatorGuard = 1e-9;

struct ModelParams {
    double mu = 0.0;     ///< base-regime drift (per unit time)
    double sigma = 0.0;  ///< base-regime volatility (per sqrt time)
    double r = 0.0;      ///< discount rate
    double rho = 0.0;    ///< target exchange rate

    /// Full check used by the free-boundary solver. Throws InvalidParameter
    /// or DegenerateDenominator.
    void validate() const;

    /// Weaker check for simulation: sigma >= 0 allowed, no denominator guard.
    void validate_for_simulation() const;
};

struct GammaRoots {
    double gamma1;  ///< positive root
    double gamma2;  ///< negative root
};

/// Roots of 1/2 sigma^2 g (g - 1) + mu g - r = 0.
GammaRoots gamma_roots(const ModelParams& params);

/// 1/2 sigma^2 g (g - 1) + mu g - r.
double characteristic_poly(const ModelParams& params, double gamma);

struct ParticularCoeffs {
    double c2;
    double c1;
    double c0;
};

/// Coefficients of the quadratic particular solution of L phi + (x - rho)^2 = 0.
ParticularCoeffs particular_coeffs(const ModelParams& params);

struct ValueCoeffs {
    double a_coef = 0.0;  ///< multiplies x^gamma1
    double b_coef = 0.0;  ///< multiplies x^gamma2
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double c2 = 0.0;
    double c1 = 0.0;
    double c0 = 0.0;

    static ValueCoeffs make(const ModelParams& params, double a_coef, double b_coef);
};

/// phi and its first two derivatives. `order` must be 0, 1 or 2.
double phi(const ValueCoeffs& coeffs, double x, int order = 0);

/// L phi(x) + (x - rho)^2 evaluated from phi, phi', phi''.
double generator_residual(const ModelParams& params, const ValueCoeffs& coeffs, double x);

/// (exp(q t) - 1) / q, with the t (1 + q t / 2 + ...) limit near q t = 0.
double discount_integral(double q, double t);

/// Expected discounted running cost over a reaction window of length t
/// started at x, with the rate following GBM(mu2, sigma2):
///   x^2 D(2 mu2 + sigma2^2 - r, t) - 2 rho x D(mu2 - r, t) + rho^2 D(-r, t).
double ktilde_fixed(double x, double t, double sigma2, double mu2, const ModelParams& params);

/// d/dx of ktilde_fixed.
double ktilde_dx(double x, double t, double sigma2, double mu2, const ModelParams& params);

/// Density of X(t) where X(0) = alpha follows GBM(mu2, sigma2).
double lognormal_density(double x, double alpha, double t, double sigma2, double mu2);

/// CDF companion of lognormal_density.
double lognormal_cdf(double x, double alpha, double t, double sigma2, double mu2);

/// Standard normal pdf and cdf.
double std_normal_pdf(double z);
double std_normal_cdf(double z);

}  // namespace fxband
