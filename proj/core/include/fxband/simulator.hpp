/**
 * @file simulator.hpp
 * @brief Monte Carlo evaluation of band policies on the two-regime process.
 *
 * Paths use exact lognormal stepping on a uniform grid. At each grid time,
 * once the reaction window of the previous intervention has closed, a rate
 * outside (a, b) is reset to alpha at cost K and a fresh (T, sigma2, mu2) is
 * drawn. During the window the rate follows GBM(mu2, sigma2) and no
 * intervention is allowed. Windows are rounded up to whole steps. The running
 * cost of a step is (X_mid - rho)^2, X_mid the geometric mean of the step's
 * endpoints, times the exact discount mass of the step.
 *
 * Each path owns two random streams derived from (seed, path index): one for
 * the Gaussian increments, one for the reaction draws. Two policies run with
 * the same seed therefore see the same Brownian increments path by path.
 */

#pragma once

#include "fxband/expectation.hpp"
#include "fxband/model.hpp"
#include "fxband/reaction.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fxband {

struct BandPolicy {
    double a = 0.0;
    double b = 0.0;
    double alpha = 0.0;

    void validate() const;
};

struct SimConfig {
    double x0 = 1.0;
    double dt = 1e-3;
    double horizon = 250.0;
    std::int64_t n_paths = 10000;
    std::uint64_t seed = 20240601;
    bool crn = true;
    int threads = 0;  ///< 0 = hardware concurrency

    void validate() const;
    std::int64_t steps() const;
    /// True when the horizon is shorter than 10 / r.
    bool horizon_too_short(double r) const;
};

struct PathResult {
    double discounted_cost = 0.0;
    std::int64_t n_interventions = 0;
};

struct CostEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t n_paths = 0;
    double mean_interventions_per_unit_time = 0.0;
};

enum class EventKind { intervene, reaction_end };

struct SimEvent {
    std::uint64_t path = 0;
    double t = 0.0;
    EventKind kind = EventKind::intervene;
    double x_before = 0.0;
    double x_after = 0.0;
    double t_drawn = 0.0;
    double sigma2_drawn = 0.0;
    double mu2_drawn = 0.0;
};

/// One path. Bit-identical to the same path index inside simulate_paths.
PathResult simulate_path(const BandPolicy& policy, const ModelParams& params,
                         const ReactionLaw& law, const CostSpec& cost, const SimConfig& cfg,
                         std::uint64_t path_index, std::vector<SimEvent>* events = nullptr);

/// Paths 0 .. n_paths-1 in index order. `stream_salt` decorrelates runs that
/// share a seed; zero for common random numbers.
std::vector<PathResult> simulate_paths(const BandPolicy& policy, const ModelParams& params,
                                       const ReactionLaw& law, const CostSpec& cost,
                                       const SimConfig& cfg, std::vector<SimEvent>* events = nullptr,
                                       std::uint64_t stream_salt = 0);

CostEstimate summarize(std::span<const PathResult> paths, double horizon);

CostEstimate estimate_cost(const BandPolicy& policy, const ModelParams& params,
                           const ReactionLaw& law, const CostSpec& cost, const SimConfig& cfg,
                           std::vector<SimEvent>* events = nullptr);

struct PairedDifference {
    std::size_t first = 0;
    std::size_t second = 0;
    double mean_diff = 0.0;  ///< cost(first) - cost(second)
    double std_error = 0.0;
};

struct PolicyComparison {
    std::vector<CostEstimate> estimates;   ///< in input order
    std::vector<std::size_t> ranking;      ///< indices by ascending mean cost
    std::vector<PairedDifference> pairs;   ///< all i < j
};

/// Evaluates every policy on the same paths when cfg.crn is set; otherwise each
/// policy gets independent streams and the difference errors are unpaired.
PolicyComparison compare_policies(std::span<const BandPolicy> policies, const ModelParams& params,
                                  const ReactionLaw& law, const CostSpec& cost,
                                  const SimConfig& cfg);

/// CSV: path,t,event,x_before,x_after,T_drawn,sigma2_drawn,mu2_drawn
void write_event_csv(std::ostream& os, std::span<const SimEvent> events);

std::string to_string(EventKind kind);

}  // namespace fxband
