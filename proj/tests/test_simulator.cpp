#include "fxband/errors.hpp"
#include "fxband/simulator.hpp"

#include "fixtures.hpp"
#include "sim_kernel.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

using namespace fxband;

namespace {

BandPolicy policy_of(const PolicySolution& sol) { return {sol.a, sol.b, sol.alpha}; }

SimConfig small_config(std::int64_t n_paths, double horizon = 50.0) {
    SimConfig cfg;
    cfg.n_paths = n_paths;
    cfg.horizon = horizon;
    cfg.x0 = 1.4;
    return cfg;
}

}  // namespace

TEST_CASE("config and policy validation") {
    CHECK_THROWS_AS(BandPolicy({1.0, 2.0, 1.0}).validate(), InvalidParameter);
    CHECK_THROWS_AS(BandPolicy({1.0, 2.0, 2.5}).validate(), InvalidParameter);
    SimConfig cfg;
    cfg.n_paths = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
    cfg = {};
    cfg.dt = 0.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
    CHECK(SimConfig{}.steps() == 250000);
    CHECK(SimConfig{}.horizon_too_short(0.06) == false);
    CHECK(small_config(1, 100.0).horizon_too_short(0.06));
}

TEST_CASE("frozen dynamics") {
    const ModelParams frozen{0.0, 0.0, 0.06, 1.4};
    const auto law = ReactionLaw::fixed(1.0, 0.0, 0.0);
    const BandPolicy policy{0.6, 2.3, 1.2};

    SUBCASE("started at the target costs nothing") {
        auto cfg = small_config(1, 100.0);
        const auto res = simulate_path(policy, frozen, law, CostSpec{0.5}, cfg, 0);
        CHECK(res.discounted_cost == 0.0);
        CHECK(res.n_interventions == 0);
    }
    SUBCASE("started above the band: one immediate intervention") {
        auto cfg = small_config(1, 800.0);
        cfg.x0 = 3.0;
        std::vector<SimEvent> events;
        const auto res = simulate_path(policy, frozen, law, CostSpec{0.5}, cfg, 0, &events);
        const double d = policy.alpha - frozen.rho;
        const double expected = 0.5 + d * d * (1.0 - std::exp(-frozen.r * cfg.horizon)) / frozen.r;
        CHECK(std::abs(res.discounted_cost - expected) < 1e-10);
        CHECK(res.n_interventions == 1);
        REQUIRE(events.size() == 2);
        CHECK(events[0].kind == EventKind::intervene);
        CHECK(events[0].t == 0.0);
        CHECK(events[0].x_before == 3.0);
        CHECK(events[0].x_after == policy.alpha);
        CHECK(events[1].kind == EventKind::reaction_end);
    }
}

TEST_CASE("reproducibility") {
    const auto p = fixtures::base_params();
    const auto law = fixtures::vol_up_law();
    const auto policy = policy_of(fixtures::t1_solution());
    auto cfg = small_config(130);

    const auto all = simulate_paths(policy, p, law, fixtures::base_cost(), cfg);
    const auto again = simulate_paths(policy, p, law, fixtures::base_cost(), cfg);
    for (std::size_t i = 0; i < all.size(); ++i) {
        CHECK(all[i].discounted_cost == again[i].discounted_cost);
        CHECK(all[i].n_interventions == again[i].n_interventions);
    }
    for (std::uint64_t i : {0ULL, 63ULL, 64ULL, 129ULL}) {
        const auto one = simulate_path(policy, p, law, fixtures::base_cost(), cfg, i);
        CHECK(one.discounted_cost == all[i].discounted_cost);
        CHECK(one.n_interventions == all[i].n_interventions);
    }

    SUBCASE("thread count does not change results") {
        auto one_thread = cfg;
        one_thread.threads = 1;
        auto four = cfg;
        four.threads = 4;
        const auto a = simulate_paths(policy, p, law, fixtures::base_cost(), one_thread);
        const auto b = simulate_paths(policy, p, law, fixtures::base_cost(), four);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].discounted_cost == b[i].discounted_cost);
    }
    SUBCASE("different seed, different paths") {
        auto other = cfg;
        other.seed += 1;
        const auto c = simulate_paths(policy, p, law, fixtures::base_cost(), other);
        CHECK(c[0].discounted_cost != all[0].discounted_cost);
    }
}

TEST_CASE("gaussian stream moments") {
    const auto z = detail::gaussian_stream(1234, 5, 400000);
    double m1 = 0, m2 = 0, m3 = 0, m4 = 0;
    for (double v : z) {
        m1 += v;
        m2 += v * v;
        m3 += v * v * v;
        m4 += v * v * v * v;
    }
    const double n = static_cast<double>(z.size());
    m1 /= n;
    m2 /= n;
    m3 /= n;
    m4 /= n;
    CHECK(std::abs(m1) < 4.0 / std::sqrt(n));
    CHECK(std::abs(m2 - 1.0) < 4.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(m3) < 4.0 * std::sqrt(15.0 / n));
    CHECK(std::abs(m4 - 3.0) < 4.0 * std::sqrt(96.0 / n));
    // Tail mass beyond 2 and 3 standard deviations.
    double t2 = 0, t3 = 0;
    for (double v : z) {
        t2 += std::abs(v) > 2.0;
        t3 += std::abs(v) > 3.0;
    }
    CHECK(std::abs(t2 / n - 0.0455003) < 4.0 * std::sqrt(0.0455 / n));
    CHECK(std::abs(t3 / n - 0.0026998) < 4.0 * std::sqrt(0.0027 / n));

    const auto again = detail::gaussian_stream(1234, 5, 100);
    for (int i = 0; i < 100; ++i) CHECK(again[i] == z[i]);
    CHECK(detail::gaussian_stream(1234, 6, 1)[0] != z[0]);
}

TEST_CASE("event log invariants") {
    const auto p = fixtures::base_params();
    const ReactionLaw law{UniformLaw{0.2, 1.5}, DiscreteLaw{{{0.0, 0.5}, {0.2, 0.5}}}, PointLaw{0.0}};
    const BandPolicy policy{0.9, 1.9, 1.3};
    auto cfg = small_config(64, 40.0);
    std::vector<SimEvent> events;
    const auto res = simulate_paths(policy, p, law, fixtures::base_cost(), cfg, &events);

    std::map<std::uint64_t, std::vector<SimEvent>> by_path;
    for (const auto& e : events) by_path[e.path].push_back(e);
    std::int64_t total = 0;
    for (const auto& r : res) total += r.n_interventions;
    std::int64_t logged = 0;
    for (const auto& [path, evs] : by_path) {
        double last_t = -1.0, last_T = 0.0;
        for (const auto& e : evs) {
            if (e.kind != EventKind::intervene) continue;
            ++logged;
            CHECK(e.x_after == policy.alpha);
            CHECK((e.x_before <= policy.a || e.x_before >= policy.b));
            if (last_t >= 0.0) CHECK(e.t - last_t >= last_T - 1e-9);
            CHECK(e.t_drawn >= 0.2);
            CHECK(e.t_drawn <= 1.5);
            CHECK((e.sigma2_drawn == doctest::Approx(0.3) || e.sigma2_drawn == doctest::Approx(0.5)));
            last_t = e.t;
            last_T = e.t_drawn;
        }
    }
    CHECK(logged == total);
    CHECK(total > 64);

    std::ostringstream os;
    write_event_csv(os, events);
    CHECK(os.str().rfind("path,t,event,x_before,x_after,T_drawn,sigma2_drawn,mu2_drawn\n", 0) == 0);
}

TEST_CASE("common random numbers") {
    const auto p = fixtures::base_params();
    const auto policy = policy_of(fixtures::t1_solution());
    auto cfg = small_config(256);
    const std::vector<BandPolicy> twice{policy, policy};
    const auto cmp = compare_policies(twice, p, fixtures::vol_up_law(), fixtures::base_cost(), cfg);
    CHECK(cmp.estimates[0].mean == cmp.estimates[1].mean);
    CHECK(cmp.pairs[0].mean_diff == 0.0);
    CHECK(cmp.pairs[0].std_error == 0.0);

    auto indep = cfg;
    indep.crn = false;
    const auto cmp2 = compare_policies(twice, p, fixtures::vol_up_law(), fixtures::base_cost(), indep);
    CHECK(cmp2.estimates[0].mean != cmp2.estimates[1].mean);
    CHECK(cmp2.pairs[0].std_error > 0.0);
}

TEST_CASE("larger cost means fewer interventions") {
    const auto p = fixtures::base_params();
    const auto lo = solve_t0(p, CostSpec{0.5});
    const auto hi = solve_t0(p, CostSpec{0.63});
    auto cfg = small_config(512, 100.0);
    const auto none = ReactionLaw::none();
    const auto e_lo = estimate_cost(policy_of(lo), p, none, CostSpec{0.5}, cfg);
    const auto e_hi = estimate_cost(policy_of(hi), p, none, CostSpec{0.63}, cfg);
    CHECK(e_hi.mean_interventions_per_unit_time < e_lo.mean_interventions_per_unit_time);
}

TEST_CASE("policy tuned for the wrong reaction costs more") {
    const auto p = fixtures::base_params();
    const std::vector<BandPolicy> policies{policy_of(fixtures::t0_solution()), policy_of(fixtures::t1_solution())};
    auto cfg = small_config(2048, 100.0);
    const auto cmp = compare_policies(policies, p, ReactionLaw::none(), fixtures::base_cost(), cfg);
    CHECK(cmp.ranking[0] == 0);
    CHECK(cmp.pairs[0].mean_diff < 0.0);
}

TEST_CASE("estimate summary") {
    const std::vector<PathResult> paths{{1.0, 2}, {3.0, 4}};
    const auto est = summarize(paths, 10.0);
    CHECK(est.mean == 2.0);
    CHECK(est.std_error == doctest::Approx(1.0));
    CHECK(est.n_paths == 2);
    CHECK(est.mean_interventions_per_unit_time == doctest::Approx(0.3));
    CHECK(summarize(std::span<const PathResult>{}, 1.0).n_paths == 0);
}
