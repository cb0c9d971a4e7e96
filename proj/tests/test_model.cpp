#include "fxband/errors.hpp"
#include "fxband/model.hpp"

#include "fixtures.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <cmath>
#include <random>

using namespace fxband;

namespace {

double rel_err(double x, double ref) { return std::abs(x - ref) / std::max(1.0, std::abs(ref)); }

}  // namespace

TEST_CASE("gamma roots") {
    SUBCASE("golden ratio when mu = 0 and sigma^2 = 2r") {
        const ModelParams p{0.0, std::sqrt(2.0 * 0.05), 0.05, 1.0};
        const auto g = gamma_roots(p);
        CHECK(g.gamma1 == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-14));
        CHECK(g.gamma2 == doctest::Approx((1.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-14));
    }
    SUBCASE("reference parameters") {
        const auto p = fixtures::base_params();
        const auto g = gamma_roots(p);
        CHECK(g.gamma1 > 0.0);
        CHECK(g.gamma2 < 0.0);
        CHECK(std::abs(characteristic_poly(p, g.gamma1)) < 1e-12);
        CHECK(std::abs(characteristic_poly(p, g.gamma2)) < 1e-12);
        // Long-double quadratic formula as an independent root solve.
        const long double a = 0.5L * 0.09L, b = 0.1L - 0.5L * 0.09L, c = -0.06L;
        const long double disc = std::sqrt(b * b - 4 * a * c);
        CHECK(g.gamma1 == doctest::Approx(static_cast<double>((-b + disc) / (2 * a))).epsilon(1e-13));
        CHECK(g.gamma2 == doctest::Approx(static_cast<double>((-b - disc) / (2 * a))).epsilon(1e-13));
    }
    SUBCASE("gamma = 1 is a root when mu = r") {
        const ModelParams p{0.045, 0.25, 0.045, 1.0};
        CHECK(gamma_roots(p).gamma1 == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("residual over random parameters") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> mu(-0.2, 0.2), sig(0.05, 0.8), r(0.01, 0.2);
        for (int i = 0; i < 1000; ++i) {
            const ModelParams p{mu(rng), sig(rng), r(rng), 1.0};
            const auto g = gamma_roots(p);
            REQUIRE(g.gamma1 > 0.0);
            REQUIRE(g.gamma2 < 0.0);
            CHECK(std::abs(characteristic_poly(p, g.gamma1)) < 1e-12);
            CHECK(std::abs(characteristic_poly(p, g.gamma2)) < 1e-12);
        }
    }
}

TEST_CASE("particular solution") {
    const auto p = fixtures::base_params();
    const auto c = particular_coeffs(p);
    CHECK(c.c2 == doctest::Approx(-1.0 / 0.23).epsilon(1e-14));
    CHECK(c.c1 == doctest::Approx(70.0).epsilon(1e-13));
    CHECK(c.c0 == doctest::Approx(1.96 / 0.06).epsilon(1e-14));

    const auto v = ValueCoeffs::make(p, 0.0, 0.0);
    for (double x : {0.5, 1.4, 2.3}) CHECK(std::abs(generator_residual(p, v, x)) < 1e-10);

    ModelParams zero_rho = p;
    zero_rho.rho = 0.0;
    const auto cz = particular_coeffs(zero_rho);
    CHECK(cz.c1 == 0.0);
    CHECK(cz.c0 == 0.0);

    CHECK_THROWS_AS(particular_coeffs(ModelParams{0.06, 0.3, 0.06, 1.4}), DegenerateDenominator);
    CHECK_THROWS_AS(particular_coeffs(ModelParams{0.0, 0.2, 0.04, 1.4}), DegenerateDenominator);
}

TEST_CASE("parameter validation") {
    CHECK_NOTHROW(fixtures::base_params().validate());
    CHECK_THROWS_AS(ModelParams({0.1, 0.0, 0.06, 1.4}).validate(), InvalidParameter);
    CHECK_THROWS_AS(ModelParams({0.1, 0.3, 0.0, 1.4}).validate(), InvalidParameter);
    CHECK_THROWS_AS(ModelParams({0.1, 0.3, 0.06, -1.0}).validate(), InvalidParameter);
    CHECK_THROWS_AS(ModelParams({0.06, 0.3, 0.06, 1.4}).validate(), DegenerateDenominator);
    CHECK_NOTHROW(ModelParams({0.0, 0.0, 0.06, 1.4}).validate_for_simulation());
}

TEST_CASE("phi and derivatives") {
    const auto p = fixtures::base_params();
    const auto homog = ValueCoeffs::make(p, 0.0, 0.0);
    CHECK(phi(homog, p.rho) == doctest::Approx(homog.c2 * 1.96 + homog.c1 * 1.4 + homog.c0));

    const auto v = ValueCoeffs::make(p, -93.0, -1.3);
    const double h = 1e-6;
    for (double x : {0.4, 1.0, 2.0}) {
        const double d1 = (phi(v, x + h) - phi(v, x - h)) / (2 * h);
        const double d2 = (phi(v, x + h, 1) - phi(v, x - h, 1)) / (2 * h);
        CHECK(rel_err(phi(v, x, 1), d1) < 1e-6);
        CHECK(rel_err(phi(v, x, 2), d2) < 1e-6);
    }
    CHECK_THROWS(phi(v, 1.0, 3));

    SUBCASE("ODE residual at random points for arbitrary A, B") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> xs(0.1, 5.0), coef(-100.0, 100.0);
        for (int i = 0; i < 100; ++i) {
            const auto c = ValueCoeffs::make(p, coef(rng), coef(rng));
            CHECK(std::abs(generator_residual(p, c, xs(rng))) < 1e-8);
        }
    }

    SUBCASE("reference coefficients nearly satisfy smooth pasting") {
        // Reference values list the x^gamma2 coefficient first.
        const auto pub = ValueCoeffs::make(p, -93.064, -1.330);
        CHECK(std::abs(phi(pub, 0.622, 1)) < 0.01);
        CHECK(std::abs(phi(pub, 2.307, 1)) < 0.01);
        const auto& sol = fixtures::t0_solution();
        CHECK(std::abs(phi(sol.coeffs, sol.a, 1)) < 1e-9);
        CHECK(std::abs(phi(sol.coeffs, sol.b, 1)) < 1e-9);
    }
}

TEST_CASE("discount integral") {
    CHECK(discount_integral(0.0, 2.0) == 2.0);
    CHECK(discount_integral(-0.06, 0.0) == 0.0);
    for (double q : {1e-8, -1e-8, 1e-3, -0.06, 0.5}) {
        const double t = 1.5;
        const double direct = std::abs(q * t) > 1e-4 ? std::expm1(q * t) / q : 0.0;
        if (direct != 0.0) CHECK(discount_integral(q, t) == doctest::Approx(direct).epsilon(1e-14));
    }
    // Both sides of the series branch against extended precision.
    for (double qt : {0.5e-6, 0.999e-6, 1.001e-6, 2e-6, -0.999e-6, -1.001e-6}) {
        const long double q = qt / 2.0L;
        const double ref = static_cast<double>(std::expm1(q * 2.0L) / q);
        CHECK(discount_integral(static_cast<double>(q), 2.0) == doctest::Approx(ref).epsilon(1e-14));
    }
}

TEST_CASE("reaction-period running cost") {
    const auto p = fixtures::base_params();
    CHECK(ktilde_fixed(1.2, 0.0, 0.4, 0.1, p) == 0.0);
    CHECK(std::abs(ktilde_fixed(p.rho, 3.0, 0.0, 0.0, p)) < 1e-14);

    auto integrand_value = [&](double x, double t, double s2, double m2) {
        auto f = [&](double s) {
            return std::exp(-p.r * s) *
                   (x * x * std::exp((2 * m2 + s2 * s2) * s) - 2 * p.rho * x * std::exp(m2 * s) + p.rho * p.rho);
        };
        return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, t, 15, 1e-14);
    };
    CHECK(rel_err(ktilde_fixed(1.212, 1.0, 0.4, 0.1, p), integrand_value(1.212, 1.0, 0.4, 0.1)) < 1e-10);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> xs(0.05, 4.0), ts(0.0, 5.0), s2(0.0, 1.0), m2(-0.3, 0.3);
    for (int i = 0; i < 1000; ++i) {
        const double x = xs(rng), t = ts(rng), sv = s2(rng), mv = m2(rng);
        const double k = ktilde_fixed(x, t, sv, mv, p);
        CHECK(k >= -1e-12);
        if (i % 50 == 0) CHECK(std::abs(k - integrand_value(x, t, sv, mv)) / std::max(1e-3, k) < 1e-9);
    }

    SUBCASE("x-derivative") {
        CHECK(ktilde_dx(0.0, 1.0, 0.4, 0.1, p) ==
              doctest::Approx(-2.0 * p.rho * discount_integral(0.1 - p.r, 1.0)).epsilon(1e-14));
        CHECK(ktilde_dx(1.3, 0.0, 0.4, 0.1, p) == 0.0);
        for (double x : {0.6, 1.2, 2.3}) {
            for (double t : {0.5, 1.0, 2.0}) {
                const double h = 1e-5 * x;
                const double fd = (ktilde_fixed(x + h, t, 0.4, 0.1, p) - ktilde_fixed(x - h, t, 0.4, 0.1, p)) / (2 * h);
                CHECK(rel_err(ktilde_dx(x, t, 0.4, 0.1, p), fd) < 1e-8);
            }
        }
    }
}

TEST_CASE("lognormal transition") {
    const double alpha = 1.0, t = 1.0, s2 = 0.4, m2 = 0.1;
    const double median = alpha * std::exp((m2 - 0.5 * s2 * s2) * t);
    CHECK(lognormal_cdf(median, alpha, t, s2, m2) == doctest::Approx(0.5).epsilon(1e-14));

    auto dens_log = [&](double y) {
        const double x = std::exp(y);
        return lognormal_density(x, alpha, t, s2, m2) * x;
    };
    const double total = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        dens_log, std::log(median) - 40 * s2, std::log(median) + 40 * s2, 20, 1e-14);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));

    // Change of variables: p_X(x) = n((ln x - m) / s) / (s x).
    const double m = std::log(alpha) + (m2 - 0.5 * s2 * s2) * t, s = s2 * std::sqrt(t);
    for (double x : {0.3, 1.0, 2.5}) {
        const double z = (std::log(x) - m) / s;
        const double ref = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI) / (s * x);
        CHECK(lognormal_density(x, alpha, t, s2, m2) == doctest::Approx(ref).epsilon(1e-13));
    }
    double prev = 0.0;
    for (double x = 0.1; x < 5.0; x += 0.1) {
        const double c = lognormal_cdf(x, alpha, t, s2, m2);
        CHECK(c >= prev);
        prev = c;
    }
    CHECK_THROWS_AS(lognormal_density(1.0, 1.0, 0.0, 0.4, 0.1), DegenerateDistribution);
    CHECK_THROWS_AS(lognormal_cdf(1.0, 1.0, 1.0, 0.0, 0.1), DegenerateDistribution);
}
