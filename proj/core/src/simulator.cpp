#include "fxband/simulator.hpp"

#include "fxband/errors.hpp"
#include "sim_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <thread>

namespace fxband {

void BandPolicy::validate() const {
    if (!(std::isfinite(a) && std::isfinite(b) && std::isfinite(alpha)))
        throw InvalidParameter("policy values must be finite");
    if (!(0.0 < a && a < alpha && alpha < b))
        throw InvalidParameter("policy requires 0 < a < alpha < b");
}

void SimConfig::validate() const {
    if (!(x0 > 0.0) || !std::isfinite(x0)) throw InvalidParameter("x0 must be > 0");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParameter("dt must be > 0");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidParameter("horizon must be > 0");
    if (n_paths < 1) throw InvalidParameter("n_paths must be >= 1");
    if (threads < 0) throw InvalidParameter("threads must be >= 0");
}

std::int64_t SimConfig::steps() const {
    return static_cast<std::int64_t>(std::llround(horizon / dt));
}

bool SimConfig::horizon_too_short(double r) const { return horizon < 10.0 / r; }

namespace {

detail::KernelProblem make_problem(const BandPolicy& policy, const ModelParams& params,
                                   const ReactionLaw& law, const CostSpec& cost,
                                   const SimConfig& cfg, std::uint64_t salt) {
    policy.validate();
    params.validate_for_simulation();
    law.validate(params.sigma, false);
    if (!(cost.k_fixed >= 0.0)) throw InvalidParameter("intervention cost must be >= 0");
    cfg.validate();
    return {policy, params, law, cost.k_fixed, cfg.x0, cfg.dt, cfg.steps(), cfg.seed, salt};
}

}  // namespace

PathResult simulate_path(const BandPolicy& policy, const ModelParams& params,
                         const ReactionLaw& law, const CostSpec& cost, const SimConfig& cfg,
                         std::uint64_t path_index, std::vector<SimEvent>* events) {
    const auto problem = make_problem(policy, params, law, cost, cfg, 0);
    const std::uint64_t id = path_index;
    PathResult out;
    detail::simulate_block(problem, std::span(&id, 1), std::span(&out, 1), events);
    return out;
}

std::vector<PathResult> simulate_paths(const BandPolicy& policy, const ModelParams& params,
                                       const ReactionLaw& law, const CostSpec& cost,
                                       const SimConfig& cfg, std::vector<SimEvent>* events,
                                       std::uint64_t stream_salt) {
    const auto problem = make_problem(policy, params, law, cost, cfg, stream_salt);
    const std::int64_t n = cfg.n_paths;
    const std::int64_t n_blocks = (n + detail::kLanes - 1) / detail::kLanes;
    std::vector<PathResult> results(static_cast<std::size_t>(n));
    std::vector<std::vector<SimEvent>> block_events(events ? n_blocks : 0);

    auto run_block = [&](std::int64_t blk) {
        const std::int64_t first = blk * detail::kLanes;
        const std::int64_t count = std::min<std::int64_t>(detail::kLanes, n - first);
        std::vector<std::uint64_t> ids(static_cast<std::size_t>(count));
        std::iota(ids.begin(), ids.end(), static_cast<std::uint64_t>(first));
        detail::simulate_block(problem, ids,
                               std::span(results).subspan(static_cast<std::size_t>(first),
                                                          static_cast<std::size_t>(count)),
                               events ? &block_events[blk] : nullptr);
    };

    unsigned n_threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                         : std::max(1u, std::thread::hardware_concurrency());
    n_threads = static_cast<unsigned>(std::min<std::int64_t>(n_threads, n_blocks));
    if (n_threads <= 1) {
        for (std::int64_t blk = 0; blk < n_blocks; ++blk) run_block(blk);
    } else {
        // Static interleaved assignment; every block writes its own slice.
        std::vector<std::exception_ptr> errors(n_threads);
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n_threads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    for (std::int64_t blk = t; blk < n_blocks; blk += n_threads) run_block(blk);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    if (events)
        for (auto& be : block_events) events->insert(events->end(), be.begin(), be.end());
    return results;
}

CostEstimate summarize(std::span<const PathResult> paths, double horizon) {
    CostEstimate est;
    est.n_paths = static_cast<std::int64_t>(paths.size());
    if (paths.empty()) return est;
    double sum = 0.0;
    double count = 0.0;
    for (const auto& p : paths) {
        sum += p.discounted_cost;
        count += static_cast<double>(p.n_interventions);
    }
    const double n = static_cast<double>(paths.size());
    est.mean = sum / n;
    double ss = 0.0;
    for (const auto& p : paths) ss += (p.discounted_cost - est.mean) * (p.discounted_cost - est.mean);
    est.std_error = paths.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    est.mean_interventions_per_unit_time = count / n / horizon;
    return est;
}

CostEstimate estimate_cost(const BandPolicy& policy, const ModelParams& params,
                           const ReactionLaw& law, const CostSpec& cost, const SimConfig& cfg,
                           std::vector<SimEvent>* events) {
    const auto paths = simulate_paths(policy, params, law, cost, cfg, events);
    return summarize(paths, cfg.horizon);
}

PolicyComparison compare_policies(std::span<const BandPolicy> policies, const ModelParams& params,
                                  const ReactionLaw& law, const CostSpec& cost,
                                  const SimConfig& cfg) {
    PolicyComparison cmp;
    std::vector<std::vector<PathResult>> runs;
    runs.reserve(policies.size());
    for (std::size_t i = 0; i < policies.size(); ++i) {
        const std::uint64_t salt = cfg.crn ? 0 : i + 1;
        runs.push_back(simulate_paths(policies[i], params, law, cost, cfg, nullptr, salt));
        cmp.estimates.push_back(summarize(runs.back(), cfg.horizon));
    }
    cmp.ranking.resize(policies.size());
    std::iota(cmp.ranking.begin(), cmp.ranking.end(), std::size_t{0});
    std::stable_sort(cmp.ranking.begin(), cmp.ranking.end(), [&](std::size_t x, std::size_t y) {
        return cmp.estimates[x].mean < cmp.estimates[y].mean;
    });

    const double n = static_cast<double>(cfg.n_paths);
    for (std::size_t i = 0; i < policies.size(); ++i) {
        for (std::size_t j = i + 1; j < policies.size(); ++j) {
            PairedDifference d{i, j, cmp.estimates[i].mean - cmp.estimates[j].mean, 0.0};
            if (cfg.crn) {
                double ss = 0.0;
                for (std::size_t k = 0; k < runs[i].size(); ++k) {
                    const double diff = runs[i][k].discounted_cost - runs[j][k].discounted_cost;
                    ss += (diff - d.mean_diff) * (diff - d.mean_diff);
                }
                d.std_error = n > 1.0 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
            } else {
                d.std_error = std::hypot(cmp.estimates[i].std_error, cmp.estimates[j].std_error);
            }
            cmp.pairs.push_back(d);
        }
    }
    return cmp;
}

std::string to_string(EventKind kind) {
    return kind == EventKind::intervene ? "intervene" : "reaction_end";
}

void write_event_csv(std::ostream& os, std::span<const SimEvent> events) {
    os << "path,t,event,x_before,x_after,T_drawn,sigma2_drawn,mu2_drawn\n";
    const auto old_prec = os.precision(17);
    for (const auto& e : events) {
        os << e.path << ',' << e.t << ',' << to_string(e.kind) << ',' << e.x_before << ','
           << e.x_after << ',' << e.t_drawn << ',' << e.sigma2_drawn << ',' << e.mu2_drawn << '\n';
    }
    os.precision(old_prec);
}

}  // namespace fxband
