#include "fxband/reaction.hpp"

#include "fxband/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fxband {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

void check_scalar(const ScalarLaw& law, const char* name) {
    std::visit(overloaded{
                   [&](const PointLaw& p) {
                       if (!std::isfinite(p.value))
                           throw InvalidParameter(std::string(name) + ": point value not finite");
                   },
                   [&](const UniformLaw& u) {
                       if (!std::isfinite(u.lo) || !std::isfinite(u.hi) || u.lo > u.hi)
                           throw InvalidParameter(std::string(name) + ": uniform needs lo <= hi");
                   },
                   [&](const DiscreteLaw& d) {
                       if (d.atoms.empty())
                           throw InvalidParameter(std::string(name) + ": discrete law is empty");
                       double total = 0.0;
                       for (const auto& [v, p] : d.atoms) {
                           if (!std::isfinite(v) || !(p > 0.0))
                               throw InvalidParameter(std::string(name) +
                                                      ": discrete atoms need finite values and "
                                                      "positive probabilities");
                           total += p;
                       }
                       if (std::abs(total - 1.0) > 1e-12)
                           throw InvalidParameter(std::string(name) +
                                                  ": probabilities must sum to 1");
                   },
               },
               law);
}

}  // namespace

double law_mean(const ScalarLaw& law) {
    return std::visit(overloaded{
                          [](const PointLaw& p) { return p.value; },
                          [](const UniformLaw& u) { return 0.5 * (u.lo + u.hi); },
                          [](const DiscreteLaw& d) {
                              double m = 0.0;
                              for (const auto& [v, p] : d.atoms) m += v * p;
                              return m;
                          },
                      },
                      law);
}

double law_min(const ScalarLaw& law) {
    return std::visit(overloaded{
                          [](const PointLaw& p) { return p.value; },
                          [](const UniformLaw& u) { return u.lo; },
                          [](const DiscreteLaw& d) {
                              double m = d.atoms.front().first;
                              for (const auto& a : d.atoms) m = std::min(m, a.first);
                              return m;
                          },
                      },
                      law);
}

double law_max(const ScalarLaw& law) {
    return std::visit(overloaded{
                          [](const PointLaw& p) { return p.value; },
                          [](const UniformLaw& u) { return u.hi; },
                          [](const DiscreteLaw& d) {
                              double m = d.atoms.front().first;
                              for (const auto& a : d.atoms) m = std::max(m, a.first);
                              return m;
                          },
                      },
                      law);
}

double law_sample(const ScalarLaw& law, double u) {
    return std::visit(overloaded{
                          [](const PointLaw& p) { return p.value; },
                          [u](const UniformLaw& w) { return w.lo + (w.hi - w.lo) * u; },
                          [u](const DiscreteLaw& d) {
                              double cum = 0.0;
                              for (const auto& [v, p] : d.atoms) {
                                  cum += p;
                                  if (u < cum) return v;
                              }
                              return d.atoms.back().first;
                          },
                      },
                      law);
}

ScalarLaw law_scaled(const ScalarLaw& law, double factor) {
    return std::visit(overloaded{
                          [=](const PointLaw& p) -> ScalarLaw { return PointLaw{p.value * factor}; },
                          [=](const UniformLaw& u) -> ScalarLaw {
                              return UniformLaw{u.lo * factor, u.hi * factor};
                          },
                          [=](const DiscreteLaw& d) -> ScalarLaw {
                              DiscreteLaw out = d;
                              for (auto& a : out.atoms) a.first *= factor;
                              return out;
                          },
                      },
                      law);
}

void ReactionLaw::validate(double sigma, bool require_positive_vol) const {
    check_scalar(t_law, "T");
    check_scalar(sigma_shift_law, "sigma_shift");
    check_scalar(mu_shift_law, "mu_shift");
    if (law_min(t_law) < 0.0) throw InvalidParameter("T: support must be >= 0");
    const double vol_lo = sigma + law_min(sigma_shift_law);
    if (require_positive_vol ? !(vol_lo > 0.0) : !(vol_lo >= 0.0))
        throw InvalidParameter("sigma + sigma_shift must stay positive on the whole support");
}

bool ReactionLaw::is_none() const { return law_max(t_law) == 0.0; }

}  // namespace fxband
