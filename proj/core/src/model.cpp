#include "fxband/model.hpp"

#include "fxband/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace fxband {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw InvalidParameter(msg);
}

bool finite_all(const ModelParams& p) {
    return std::isfinite(p.mu) && std::isfinite(p.sigma) && std::isfinite(p.r) &&
           std::isfinite(p.rho);
}

}  // namespace

void ModelParams::validate() const {
    require(finite_all(*this), "model parameters must be finite");
    require(sigma > 0.0, "sigma must be > 0");
    require(r > 0.0, "r must be > 0");
    require(rho > 0.0, "rho must be > 0");
    if (std::abs(r - mu) <= kDenominatorGuard)
        throw DegenerateDenominator("|r - mu| below denominator guard");
    if (std::abs(r - sigma * sigma - 2.0 * mu) <= kDenominatorGuard)
        throw DegenerateDenominator("|r - sigma^2 - 2 mu| below denominator guard");
}

void ModelParams::validate_for_simulation() const {
    require(finite_all(*this), "model parameters must be finite");
    require(sigma >= 0.0, "sigma must be >= 0");
    require(r > 0.0, "r must be > 0");
    require(rho >= 0.0, "rho must be >= 0");
}

double characteristic_poly(const ModelParams& params, double gamma) {
    return 0.5 * params.sigma * params.sigma * gamma * (gamma - 1.0) + params.mu * gamma - params.r;
}

GammaRoots gamma_roots(const ModelParams& params) {
    // Only sigma and r enter the characteristic equation.
    require(std::isfinite(params.mu) && std::isfinite(params.sigma) && std::isfinite(params.r),
            "model parameters must be finite");
    require(params.sigma > 0.0, "sigma must be > 0");
    require(params.r > 0.0, "r must be > 0");
    // qa g^2 + qb g + qc = 0; qa > 0 and qc < 0 so the roots have opposite signs.
    const double qa = 0.5 * params.sigma * params.sigma;
    const double qb = params.mu - qa;
    const double qc = -params.r;
    const double disc = std::sqrt(qb * qb - 4.0 * qa * qc);
    // Cancellation-free pair: q / qa and qc / q.
    const double q = -0.5 * (qb + std::copysign(disc, qb));
    double g_a = q / qa;
    double g_b = qc / q;
    if (g_a < g_b) std::swap(g_a, g_b);
    // One Newton polish per root.
    auto polish = [&](double g) {
        const double f = qa * g * g + qb * g + qc;
        const double df = 2.0 * qa * g + qb;
        return g - f / df;
    };
    return {polish(g_a), polish(g_b)};
}

ParticularCoeffs particular_coeffs(const ModelParams& params) {
    const double d1 = params.r - params.mu;
    const double d2 = params.r - params.sigma * params.sigma - 2.0 * params.mu;
    if (std::abs(d1) <= kDenominatorGuard)
        throw DegenerateDenominator("|r - mu| below denominator guard");
    if (std::abs(d2) <= kDenominatorGuard)
        throw DegenerateDenominator("|r - sigma^2 - 2 mu| below denominator guard");
    return {1.0 / d2, -2.0 * params.rho / d1, params.rho * params.rho / params.r};
}

ValueCoeffs ValueCoeffs::make(const ModelParams& params, double a_coef, double b_coef) {
    const auto g = gamma_roots(params);
    const auto p = particular_coeffs(params);
    return {a_coef, b_coef, g.gamma1, g.gamma2, p.c2, p.c1, p.c0};
}

double phi(const ValueCoeffs& c, double x, int order) {
    const double p1 = std::pow(x, c.gamma1);
    const double p2 = std::pow(x, c.gamma2);
    switch (order) {
        case 0:
            return c.a_coef * p1 + c.b_coef * p2 + (c.c2 * x + c.c1) * x + c.c0;
        case 1:
            return (c.a_coef * c.gamma1 * p1 + c.b_coef * c.gamma2 * p2) / x + 2.0 * c.c2 * x + c.c1;
        case 2:
            return (c.a_coef * c.gamma1 * (c.gamma1 - 1.0) * p1 +
                    c.b_coef * c.gamma2 * (c.gamma2 - 1.0) * p2) /
                       (x * x) +
                   2.0 * c.c2;
        default:
            throw InvalidParameter("phi: derivative order must be 0, 1 or 2");
    }
}

double generator_residual(const ModelParams& params, const ValueCoeffs& coeffs, double x) {
    const double v = phi(coeffs, x, 0);
    const double d1 = phi(coeffs, x, 1);
    const double d2 = phi(coeffs, x, 2);
    const double dev = x - params.rho;
    return 0.5 * params.sigma * params.sigma * x * x * d2 + params.mu * x * d1 - params.r * v +
           dev * dev;
}

double discount_integral(double q, double t) {
    const double qt = q * t;
    if (std::abs(qt) < 1e-6) {
        // t (1 + qt/2 + (qt)^2/6 + (qt)^3/24)
        return t * (1.0 + qt * (0.5 + qt * (1.0 / 6.0 + qt / 24.0)));
    }
    return std::expm1(qt) / q;
}

double ktilde_fixed(double x, double t, double sigma2, double mu2, const ModelParams& params) {
    if (t < 0.0) throw InvalidParameter("ktilde: t must be >= 0");
    const double r = params.r;
    const double rho = params.rho;
    return x * x * discount_integral(2.0 * mu2 + sigma2 * sigma2 - r, t) -
           2.0 * rho * x * discount_integral(mu2 - r, t) + rho * rho * discount_integral(-r, t);
}

double ktilde_dx(double x, double t, double sigma2, double mu2, const ModelParams& params) {
    if (t < 0.0) throw InvalidParameter("ktilde: t must be >= 0");
    return 2.0 * x * discount_integral(2.0 * mu2 + sigma2 * sigma2 - params.r, t) -
           2.0 * params.rho * discount_integral(mu2 - params.r, t);
}

double std_normal_pdf(double z) {
    return std::exp(-0.5 * z * z) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

namespace {

struct LogMoments {
    double mean;
    double sd;
};

LogMoments log_moments(double alpha, double t, double sigma2, double mu2) {
    if (!(alpha > 0.0)) throw InvalidParameter("lognormal: alpha must be > 0");
    if (t < 0.0) throw InvalidParameter("lognormal: t must be >= 0");
    const double var = sigma2 * sigma2 * t;
    if (!(var > 0.0))
        throw DegenerateDistribution("lognormal: t * sigma2^2 == 0, transition is a point mass");
    return {std::log(alpha) + (mu2 - 0.5 * sigma2 * sigma2) * t, std::sqrt(var)};
}

}  // namespace

double lognormal_density(double x, double alpha, double t, double sigma2, double mu2) {
    const auto m = log_moments(alpha, t, sigma2, mu2);
    if (!(x > 0.0)) return 0.0;
    const double z = (std::log(x) - m.mean) / m.sd;
    return std_normal_pdf(z) / (x * m.sd);
}

double lognormal_cdf(double x, double alpha, double t, double sigma2, double mu2) {
    const auto m = log_moments(alpha, t, sigma2, mu2);
    if (!(x > 0.0)) return 0.0;
    return std_normal_cdf((std::log(x) - m.mean) / m.sd);
}

}  // namespace fxband
