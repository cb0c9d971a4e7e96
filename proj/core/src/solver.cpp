#include "fxband/solver.hpp"

#include "fxband/errors.hpp"

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fxband {

namespace {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

constexpr double kMinGap = 1e-12;
constexpr int kMaxHalvings = 30;
constexpr int kPolishSteps = 2;

Vec5 to_internal(const Unknowns& u) {
    Vec5 v;
    v << u.A, u.B, std::log(u.a), std::log(u.alpha - u.a), std::log(u.b - u.alpha);
    return v;
}

Unknowns from_internal(const Vec5& v) {
    Unknowns u;
    u.A = v[0];
    u.B = v[1];
    u.a = std::exp(v[2]);
    u.alpha = u.a + std::exp(v[3]);
    u.b = u.alpha + std::exp(v[4]);
    return u;
}

bool finite(const Residuals& r) {
    return std::all_of(r.begin(), r.end(), [](double x) { return std::isfinite(x); });
}

Vec5 as_vec(const Residuals& r) {
    Vec5 v;
    for (int i = 0; i < 5; ++i) v[i] = r[i];
    return v;
}

// Residuals at internal coordinates; nullopt when the trial point leaves the
// domain or produces non-finite values.
std::optional<Residuals> try_residuals(const FreeBoundarySystem& sys, const Vec5& v) {
    if (!v.allFinite()) return std::nullopt;
    const Unknowns u = from_internal(v);
    if (!(u.a > 0.0 && u.alpha > u.a && u.b > u.alpha) || !std::isfinite(u.b)) return std::nullopt;
    try {
        Residuals r = sys.residuals(u);
        if (!finite(r)) return std::nullopt;
        return r;
    } catch (const DomainViolation&) {
        return std::nullopt;
    }
}

Mat5 jacobian(const FreeBoundarySystem& sys, const Vec5& v, double fd_step) {
    Mat5 jac;
    for (int j = 0; j < 5; ++j) {
        const double h = fd_step * std::max(1.0, std::abs(v[j]));
        Vec5 vp = v;
        Vec5 vm = v;
        vp[j] += h;
        vm[j] -= h;
        const auto rp = try_residuals(sys, vp);
        const auto rm = try_residuals(sys, vm);
        if (!rp || !rm) throw NoConvergence("Jacobian evaluation left the domain", {});
        jac.col(j) = (as_vec(*rp) - as_vec(*rm)) / (2.0 * h);
    }
    return jac;
}

// T = 0 only: given the band, smooth pasting fixes (A, B) linearly and alpha
// is the interior minimiser of phi.
struct ReducedGuess {
    Unknowns u;
    double score = std::numeric_limits<double>::infinity();
};

std::optional<ReducedGuess> reduced_guess(const CostSpec& cost,
                                          const GammaRoots& g, const ParticularCoeffs& p,
                                          double a, double b) {
    Eigen::Matrix2d m;
    m << g.gamma1 * std::pow(a, g.gamma1 - 1.0), g.gamma2 * std::pow(a, g.gamma2 - 1.0),
        g.gamma1 * std::pow(b, g.gamma1 - 1.0), g.gamma2 * std::pow(b, g.gamma2 - 1.0);
    Eigen::Vector2d rhs(-(2.0 * p.c2 * a + p.c1), -(2.0 * p.c2 * b + p.c1));
    const Eigen::Vector2d ab = m.fullPivLu().solve(rhs);
    if (!ab.allFinite()) return std::nullopt;
    const ValueCoeffs c{ab[0], ab[1], g.gamma1, g.gamma2, p.c2, p.c1, p.c0};

    constexpr int kSamples = 64;
    int best = -1;
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 1; i < kSamples; ++i) {
        const double x = a + (b - a) * i / kSamples;
        const double v = phi(c, x, 0);
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    if (best <= 0) return std::nullopt;
    const double lo = a + (b - a) * (best - 1) / kSamples;
    const double hi = a + (b - a) * (best + 1) / kSamples;
    const auto [alpha, phi_alpha] = boost::math::tools::brent_find_minima(
        [&](double x) { return phi(c, x, 0); }, lo, hi, 40);
    if (!(alpha > a && alpha < b)) return std::nullopt;
    const double theta = phi(c, a, 0);
    if (!(phi_alpha < theta)) return std::nullopt;
    const double f1 = theta - phi(c, b, 0);
    const double f2 = theta - cost.k_fixed - phi_alpha;
    return ReducedGuess{{ab[0], ab[1], a, b, alpha}, std::hypot(f1, f2)};
}

std::vector<Unknowns> baseline_starts(const ModelParams& params, const CostSpec& cost) {
    const auto g = gamma_roots(params);
    const auto p = particular_coeffs(params);
    constexpr int kGrid = 40;
    constexpr int kKeep = 6;
    std::vector<ReducedGuess> found;
    for (int i = 0; i < kGrid; ++i) {
        const double a = params.rho * (0.02 + 0.96 * i / (kGrid - 1));
        for (int j = 0; j < kGrid; ++j) {
            const double b = params.rho * (1.02 + 4.0 * j / (kGrid - 1));
            if (auto r = reduced_guess(cost, g, p, a, b)) found.push_back(*r);
        }
    }
    std::sort(found.begin(), found.end(),
              [](const ReducedGuess& x, const ReducedGuess& y) { return x.score < y.score; });
    std::vector<Unknowns> out;
    for (int i = 0; i < std::min<int>(kKeep, found.size()); ++i) out.push_back(found[i].u);
    return out;
}

}  // namespace

void SolverConfig::validate() const {
    if (!(tol_residual > 0.0)) throw InvalidParameter("tol_residual must be > 0");
    if (max_iter < 1) throw InvalidParameter("max_iter must be >= 1");
    if (!(fd_step > 0.0)) throw InvalidParameter("fd_step must be > 0");
    if (n_inner < 1) throw InvalidParameter("n_inner must be >= 1");
    if (n_quad < 1) throw InvalidParameter("n_quad must be >= 1");
    if (homotopy_steps < 0) throw InvalidParameter("homotopy_steps must be >= 0");
}

double residual_norm(const Residuals& res) {
    double s = 0.0;
    for (double r : res) s += r * r;
    return std::sqrt(s);
}

FreeBoundarySystem::FreeBoundarySystem(ModelParams params, CostSpec cost, ReactionNodes nodes,
                                       int n_inner)
    : params_(params),
      cost_(cost),
      nodes_(std::move(nodes)),
      n_inner_(n_inner),
      gammas_(gamma_roots(params)),
      particular_(particular_coeffs(params)) {}

BandValue FreeBoundarySystem::band(const Unknowns& u) const {
    const ValueCoeffs c{u.A,          u.B,          gammas_.gamma1, gammas_.gamma2,
                        particular_.c2, particular_.c1, particular_.c0};
    return {u.a, u.b, phi(c, u.a, 0), c};
}

Residuals FreeBoundarySystem::residuals(const Unknowns& u) const {
    if (!(u.a > 0.0 && u.a < u.alpha && u.alpha < u.b))
        throw DomainViolation("residuals require 0 < a < alpha < b");
    const BandValue bv = band(u);
    const auto after = expected_phi_after_terms(bv, u.alpha, nodes_, params_, n_inner_);
    const double restart = cost_.k_fixed + expected_ktilde(u.alpha, nodes_, params_) + after.value;
    const double restart_slope = expected_ktilde_dx(u.alpha, nodes_, params_) + after.d_alpha;
    return {bv.theta - restart, phi(bv.coeffs, u.b, 0) - bv.theta, phi(bv.coeffs, u.a, 1),
            phi(bv.coeffs, u.b, 1), restart_slope};
}

PolicySolution newton_solve(const FreeBoundarySystem& sys, const Unknowns& start,
                            const SolverConfig& config) {
    config.validate();
    Vec5 v = to_internal(start);
    auto r0 = try_residuals(sys, v);
    if (!r0) throw DomainViolation("Newton start violates 0 < a < alpha < b");
    Residuals res = *r0;
    double norm = residual_norm(res);
    std::vector<double> trace{norm};

    int iter = 0;
    int polish = 0;
    while (iter < config.max_iter) {
        if (norm < config.tol_residual) {
            if (polish >= kPolishSteps) break;
            ++polish;
        }
        const Mat5 jac = jacobian(sys, v, config.fd_step);
        const Vec5 step = jac.fullPivLu().solve(-as_vec(res));
        if (!step.allFinite()) throw NoConvergence("singular Jacobian", trace);

        double lambda = 1.0;
        bool accepted = false;
        for (int h = 0; h <= kMaxHalvings; ++h, lambda *= 0.5) {
            const Vec5 trial = v + lambda * step;
            const auto r = try_residuals(sys, trial);
            if (!r) continue;
            const double n = residual_norm(*r);
            if (n < norm) {
                v = trial;
                res = *r;
                norm = n;
                accepted = true;
                break;
            }
        }
        ++iter;
        if (!accepted) {
            if (norm < config.tol_residual) break;  // polish step could not improve
            throw NoConvergence("line search failed after " + std::to_string(kMaxHalvings) +
                                    " halvings (residual norm " + std::to_string(norm) + ")",
                                trace);
        }
        trace.push_back(norm);
        const Unknowns u = from_internal(v);
        if (u.alpha - u.a < kMinGap || u.b - u.alpha < kMinGap)
            throw OrderingCollapse("restart point collapsed onto a band edge");
    }
    if (!(norm < config.tol_residual))
        throw NoConvergence("no convergence in " + std::to_string(config.max_iter) +
                                " iterations (residual norm " + std::to_string(norm) + ")",
                            trace);

    const Unknowns u = from_internal(v);
    PolicySolution sol;
    const BandValue bv = sys.band(u);
    sol.coeffs = bv.coeffs;
    sol.a = u.a;
    sol.b = u.b;
    sol.alpha = u.alpha;
    sol.theta = bv.theta;
    sol.residual_norm = norm;
    sol.iterations = iter;
    return sol;
}

PolicySolution solve_t0(const ModelParams& params, const CostSpec& cost,
                        const SolverConfig& config) {
    params.validate();
    cost.validate();
    config.validate();
    const FreeBoundarySystem sys(params, cost, build_nodes(ReactionLaw::none(), params, 1),
                                 config.n_inner);
    const auto starts = baseline_starts(params, cost);
    if (starts.empty())
        throw NoConvergence("no admissible band found for the baseline initial guess", {});
    std::string last_error;
    for (const auto& start : starts) {
        try {
            PolicySolution sol = newton_solve(sys, start, config);
            sol.verified = verify(sol, sys);
            return sol;
        } catch (const NoConvergence& e) {
            last_error = e.what();
        } catch (const OrderingCollapse& e) {
            last_error = e.what();
        }
    }
    throw NoConvergence("baseline solve failed from every start: " + last_error, {});
}

PolicySolution solve(const ModelParams& params, const CostSpec& cost, const ReactionLaw& law,
                     const SolverConfig& config, const std::optional<Unknowns>& initial) {
    params.validate();
    cost.validate();
    config.validate();
    law.validate(params.sigma);

    const Unknowns start = initial ? *initial : solve_t0(params, cost, config).unknowns();
    const FreeBoundarySystem sys(params, cost, build_nodes(law, params, config.n_quad),
                                 config.n_inner);
    try {
        PolicySolution sol = newton_solve(sys, start, config);
        sol.verified = verify(sol, sys);
        return sol;
    } catch (const Error&) {
        if (config.homotopy_steps == 0) throw;
    }

    // Ramp the reaction window from zero to its target length.
    Unknowns warm = start;
    for (int s = 1; s <= config.homotopy_steps; ++s) {
        const double scale = static_cast<double>(s) / config.homotopy_steps;
        ReactionLaw stage = law;
        stage.t_law = law_scaled(law.t_law, scale);
        const FreeBoundarySystem stage_sys(params, cost, build_nodes(stage, params, config.n_quad),
                                           config.n_inner);
        warm = newton_solve(stage_sys, warm, config).unknowns();
    }
    PolicySolution sol = newton_solve(sys, warm, config);
    sol.verified = verify(sol, sys);
    return sol;
}

bool VerificationReport::all_pass() const {
    return cond_lower.pass && cond_upper.pass && value_at_alpha.pass && ode_residual.pass &&
           outside_band.pass && below_theta.pass && smooth_pasting.pass;
}

VerificationReport verify(const PolicySolution& sol, const FreeBoundarySystem& sys,
                          const VerifyTolerances& tol) {
    const ModelParams& p = sys.params();
    const ValueCoeffs& c = sol.coeffs;
    VerificationReport rep;

    const double half_width = std::sqrt(std::max(0.0, p.r * sol.theta));
    rep.cond_lower.margin = (p.rho - half_width) - sol.a;
    rep.cond_upper.margin = sol.b - (p.rho + half_width);
    rep.cond_lower.pass = sol.theta >= 0.0 && rep.cond_lower.margin > 0.0;
    rep.cond_upper.pass = sol.theta >= 0.0 && rep.cond_upper.margin > 0.0;

    rep.value_at_alpha.margin = sol.theta - phi(c, sol.alpha, 0);
    rep.value_at_alpha.pass = rep.value_at_alpha.margin > 0.0;

    double max_ode = 0.0;
    double max_phi = -std::numeric_limits<double>::infinity();
    const int n = tol.band_points;
    for (int i = 1; i <= n; ++i) {
        const double x = sol.a + (sol.b - sol.a) * i / (n + 1.0);
        max_ode = std::max(max_ode, std::abs(generator_residual(p, c, x)));
        max_phi = std::max(max_phi, phi(c, x, 0));
    }
    rep.ode_residual.margin = tol.ode_residual - max_ode;
    rep.ode_residual.pass = rep.ode_residual.margin > 0.0;
    rep.below_theta.margin = sol.theta + tol.below_theta - max_phi;
    rep.below_theta.pass = rep.below_theta.margin >= 0.0;

    // Outside the band L V + f = -r theta + (x - rho)^2.
    double min_out = std::numeric_limits<double>::infinity();
    const int m = tol.outside_points;
    for (int i = 1; i <= m; ++i) {
        const double lo = sol.a * i / m;
        const double hi = sol.b * (1.0 + static_cast<double>(i - 1) / m);
        min_out = std::min(min_out, -p.r * sol.theta + (lo - p.rho) * (lo - p.rho));
        min_out = std::min(min_out, -p.r * sol.theta + (hi - p.rho) * (hi - p.rho));
    }
    rep.outside_band.margin = min_out;
    rep.outside_band.pass = min_out >= 0.0;

    const double slope = std::max(std::abs(phi(c, sol.a, 1)), std::abs(phi(c, sol.b, 1)));
    rep.smooth_pasting.margin = tol.smooth_pasting - slope;
    rep.smooth_pasting.pass = rep.smooth_pasting.margin > 0.0;
    return rep;
}

double value_function(const PolicySolution& sol, double x) {
    if (!(x > 0.0)) throw InvalidParameter("value_function: x must be > 0");
    return (x >= sol.a && x <= sol.b) ? phi(sol.coeffs, x, 0) : sol.theta;
}

CostCalibration match_band_with_cost(const ModelParams& params, double target_a, double target_b,
                                     double k_lo, double k_hi, const SolverConfig& config) {
    if (!(0.0 < k_lo && k_lo < k_hi)) throw InvalidParameter("cost bracket must be 0 < lo < hi");
    std::optional<PolicySolution> last;
    auto solve_at = [&](double k) {
        const CostSpec cost{k};
        if (last) {
            try {
                const FreeBoundarySystem sys(params, cost,
                                             build_nodes(ReactionLaw::none(), params, 1),
                                             config.n_inner);
                PolicySolution sol = newton_solve(sys, last->unknowns(), config);
                sol.verified = verify(sol, sys);
                return sol;
            } catch (const Error&) {
            }
        }
        return solve_t0(params, cost, config);
    };
    auto misfit = [&](double k) {
        last = solve_at(k);
        const double da = last->a - target_a;
        const double db = last->b - target_b;
        return da * da + db * db;
    };
    const auto [k_best, err] = boost::math::tools::brent_find_minima(misfit, k_lo, k_hi, 40);
    (void)err;
    return {k_best, solve_at(k_best)};
}

}  // namespace fxband
