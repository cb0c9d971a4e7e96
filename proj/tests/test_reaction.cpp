#include "fxband/errors.hpp"
#include "fxband/expectation.hpp"
#include "fxband/quadrature.hpp"
#include "fxband/reaction.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>

using namespace fxband;

TEST_CASE("Gauss-Legendre rules") {
    for (int n : {1, 2, 5, 16, 32, 200}) {
        const auto& g = gauss_legendre(n);
        REQUIRE(g.size() == n);
        double w = 0.0;
        for (double wi : g.weights) w += wi;
        CHECK(w == doctest::Approx(2.0).epsilon(1e-14));
        // Exact for degree 2n - 1.
        const int deg = 2 * n - 1;
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += g.weights[i] * std::pow(g.nodes[i], deg - 1);
        CHECK(s == doctest::Approx(2.0 / deg).epsilon(1e-12));
    }
    CHECK(&gauss_legendre(16) == &gauss_legendre(16));
    CHECK_THROWS(GaussLegendre(0));
}

TEST_CASE("scalar laws") {
    const ScalarLaw u = UniformLaw{0.0, 2.0};
    CHECK(law_mean(u) == 1.0);
    CHECK(law_min(u) == 0.0);
    CHECK(law_max(u) == 2.0);
    CHECK(law_sample(u, 0.25) == 0.5);

    const ScalarLaw d = DiscreteLaw{{{0.5, 0.25}, {1.5, 0.75}}};
    CHECK(law_mean(d) == doctest::Approx(1.25));
    CHECK(law_sample(d, 0.1) == 0.5);
    CHECK(law_sample(d, 0.3) == 1.5);
    CHECK(law_max(law_scaled(d, 2.0)) == 3.0);

    CHECK(law_sample(PointLaw{0.7}, 0.99) == 0.7);
}

TEST_CASE("reaction law validation") {
    CHECK_NOTHROW(ReactionLaw::fixed(1.0, 0.1, 0.0).validate(0.3));
    CHECK_NOTHROW(ReactionLaw::fixed(1.0, -0.2, 0.0).validate(0.3));
    CHECK_THROWS_AS(ReactionLaw::fixed(1.0, -0.3, 0.0).validate(0.3), InvalidParameter);
    CHECK_NOTHROW(ReactionLaw::fixed(1.0, -0.3, 0.0).validate(0.3, false));
    CHECK_THROWS_AS(ReactionLaw::fixed(-1.0, 0.0, 0.0).validate(0.3), InvalidParameter);

    ReactionLaw bad_prob{DiscreteLaw{{{1.0, 0.5}, {2.0, 0.4}}}, PointLaw{0.0}, PointLaw{0.0}};
    CHECK_THROWS_AS(bad_prob.validate(0.3), InvalidParameter);
    ReactionLaw bad_uniform{UniformLaw{1.0, 0.5}, PointLaw{0.0}, PointLaw{0.0}};
    CHECK_THROWS_AS(bad_uniform.validate(0.3), InvalidParameter);

    CHECK(ReactionLaw::none().is_none());
    CHECK_FALSE(ReactionLaw::fixed(1.0, 0.0, 0.0).is_none());
}

TEST_CASE("reaction nodes") {
    const auto p = fixtures::base_params();

    const auto one = build_nodes(ReactionLaw::fixed(1.0, 0.1, 0.0), p);
    REQUIRE(one.nodes.size() == 1);
    CHECK(one.nodes[0].t == 1.0);
    CHECK(one.nodes[0].sigma2 == doctest::Approx(0.4));
    CHECK(one.nodes[0].mu2 == doctest::Approx(0.1));
    CHECK(one.nodes[0].weight == 1.0);

    const auto uni = build_nodes({UniformLaw{0.0, 1.0}, PointLaw{0.1}, PointLaw{0.0}}, p, 16);
    CHECK(uni.nodes.size() == 16);
    CHECK(uni.total_weight() == doctest::Approx(1.0).epsilon(1e-14));
    double mean_t = 0.0;
    for (const auto& n : uni.nodes) mean_t += n.weight * n.t;
    CHECK(mean_t == doctest::Approx(0.5).epsilon(1e-14));

    // sigma2 in {0.35, 0.45} means shifts of {0.05, 0.15} over sigma = 0.3.
    const ReactionLaw product{DiscreteLaw{{{0.5, 0.5}, {1.5, 0.5}}},
                              DiscreteLaw{{{0.05, 0.5}, {0.15, 0.5}}}, PointLaw{0.0}};
    const auto prod = build_nodes(product, p);
    REQUIRE(prod.nodes.size() == 4);
    for (const auto& n : prod.nodes) CHECK(n.weight == doctest::Approx(0.25));
    CHECK(prod.total_weight() == doctest::Approx(1.0).epsilon(1e-14));

    CHECK_THROWS(build_nodes(ReactionLaw::fixed(1.0, 0.1, 0.0), p, 0));
}
