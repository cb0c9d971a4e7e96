#include "fxband/expectation.hpp"

#include "fxband/errors.hpp"
#include "fxband/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace fxband {

namespace {

// Inner integrals are truncated at this many standard deviations of log X.
constexpr double kTailCut = 12.0;

std::vector<std::pair<double, double>> marginal_nodes(const ScalarLaw& law, int n_quad) {
    if (const auto* p = std::get_if<PointLaw>(&law)) return {{p->value, 1.0}};
    if (const auto* d = std::get_if<DiscreteLaw>(&law)) return d->atoms;
    if (const auto* u = std::get_if<UniformLaw>(&law)) {
        if (u->hi == u->lo) return {{u->lo, 1.0}};
        const auto& gl = gauss_legendre(n_quad);
        std::vector<std::pair<double, double>> out;
        out.reserve(gl.size());
        const double half = 0.5 * (u->hi - u->lo);
        const double mid = 0.5 * (u->hi + u->lo);
        for (int i = 0; i < gl.size(); ++i) out.emplace_back(mid + half * gl.nodes[i], 0.5 * gl.weights[i]);
        return out;
    }
    throw UnsupportedLaw("unsupported reaction law");
}

}  // namespace

void CostSpec::validate() const {
    if (!(k_fixed > 0.0) || !std::isfinite(k_fixed))
        throw InvalidParameter("intervention cost K must be > 0");
}

double ReactionNodes::total_weight() const {
    double s = 0.0;
    for (const auto& n : nodes) s += n.weight;
    return s;
}

ReactionNodes build_nodes(const ReactionLaw& law, const ModelParams& params, int n_quad) {
    if (n_quad < 1) throw InvalidParameter("n_quad must be >= 1");
    const auto ts = marginal_nodes(law.t_law, n_quad);
    const auto ss = marginal_nodes(law.sigma_shift_law, n_quad);
    const auto ms = marginal_nodes(law.mu_shift_law, n_quad);
    ReactionNodes out;
    out.nodes.reserve(ts.size() * ss.size() * ms.size());
    for (const auto& [t, wt] : ts)
        for (const auto& [ds, wsig] : ss)
            for (const auto& [dm, wmu] : ms)
                out.nodes.push_back({t, params.sigma + ds, params.mu + dm, wt * wsig * wmu});
    return out;
}

double BandValue::value(double x) const {
    return (x > a && x < b) ? phi(coeffs, x, 0) : theta;
}

double BandValue::derivative(double x) const {
    return (x > a && x < b) ? phi(coeffs, x, 1) : 0.0;
}

AfterTerms expected_phi_after_terms(const BandValue& band, double alpha, const ReactionNodes& nodes,
                                    const ModelParams& params, int n_inner) {
    if (!(band.a > 0.0 && band.a < band.b))
        throw DomainViolation("band requires 0 < a < b");
    if (!(alpha > 0.0)) throw DomainViolation("restart point must be > 0");
    if (n_inner < 1) throw InvalidParameter("n_inner must be >= 1");

    const auto& gl = gauss_legendre(n_inner);
    const double log_a = std::log(band.a);
    const double log_b = std::log(band.b);
    const double log_alpha = std::log(alpha);

    AfterTerms acc;
    for (const auto& node : nodes.nodes) {
        double value = 0.0;
        double d_alpha = 0.0;
        if (node.t == 0.0) {
            value = band.value(alpha);
            d_alpha = band.derivative(alpha);
        } else if (node.sigma2 == 0.0) {
            // Deterministic transition to alpha * exp(mu2 t).
            const double growth = std::exp(node.mu2 * node.t);
            const double disc = std::exp(-params.r * node.t);
            value = disc * band.value(alpha * growth);
            d_alpha = disc * band.derivative(alpha * growth) * growth;
        } else {
            const double sd = node.sigma2 * std::sqrt(node.t);
            const double mean = log_alpha + (node.mu2 - 0.5 * node.sigma2 * node.sigma2) * node.t;
            const double za = (log_a - mean) / sd;
            const double zb = (log_b - mean) / sd;

            // Body: integral over log x in (log a, log b) of phi(x) n(z) / sd.
            double body = 0.0;
            double d_body = 0.0;
            const double lo = std::max(log_a, mean - kTailCut * sd);
            const double hi = std::min(log_b, mean + kTailCut * sd);
            if (lo < hi) {
                const double half = 0.5 * (hi - lo);
                const double mid = 0.5 * (hi + lo);
                for (int i = 0; i < gl.size(); ++i) {
                    const double y = mid + half * gl.nodes[i];
                    const double z = (y - mean) / sd;
                    const double dens = std_normal_pdf(z) / sd;
                    const double f = phi(band.coeffs, std::exp(y), 0) * dens * gl.weights[i];
                    body += f;
                    d_body += f * z / (sd * alpha);
                }
                body *= half;
                d_body *= half;
            }
            // Outside (a, b) the value is theta.
            const double tail = std_normal_cdf(za) + std_normal_cdf(-zb);
            const double d_tail = (std_normal_pdf(zb) - std_normal_pdf(za)) / (sd * alpha);

            const double disc = std::exp(-params.r * node.t);
            value = disc * (body + band.theta * tail);
            d_alpha = disc * (d_body + band.theta * d_tail);
        }
        acc.value += node.weight * value;
        acc.d_alpha += node.weight * d_alpha;
    }
    return acc;
}

double expected_phi_after(const BandValue& band, double alpha, const ReactionNodes& nodes,
                          const ModelParams& params, int n_inner) {
    return expected_phi_after_terms(band, alpha, nodes, params, n_inner).value;
}

double d_dalpha_expected_phi_after(const BandValue& band, double alpha,
                                   const ReactionNodes& nodes, const ModelParams& params,
                                   int n_inner) {
    return expected_phi_after_terms(band, alpha, nodes, params, n_inner).d_alpha;
}

double expected_ktilde(double alpha, const ReactionNodes& nodes, const ModelParams& params) {
    double s = 0.0;
    for (const auto& n : nodes.nodes) s += n.weight * ktilde_fixed(alpha, n.t, n.sigma2, n.mu2, params);
    return s;
}

double expected_ktilde_dx(double alpha, const ReactionNodes& nodes, const ModelParams& params) {
    double s = 0.0;
    for (const auto& n : nodes.nodes) s += n.weight * ktilde_dx(alpha, n.t, n.sigma2, n.mu2, params);
    return s;
}

double intervention_value(const BandValue& band, double alpha, const ReactionNodes& nodes,
                          const CostSpec& cost, const ModelParams& params, int n_inner) {
    return cost.k_fixed + expected_ktilde(alpha, nodes, params) +
           expected_phi_after(band, alpha, nodes, params, n_inner);
}

}  // namespace fxband
