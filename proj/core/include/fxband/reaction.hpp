#pragma once

#include <utility>
#include <variant>
#include <vector>

namespace fxband {

struct PointLaw {
    double value = 0.0;
};

struct UniformLaw {
    double lo = 0.0;
    double hi = 0.0;
};

struct DiscreteLaw {
    std::vector<std::pair<double, double>> atoms;  ///< (value, probability)
};

/// Law of one scalar reaction variable.
using ScalarLaw = std::variant<PointLaw, UniformLaw, DiscreteLaw>;

double law_mean(const ScalarLaw& law);
double law_min(const ScalarLaw& law);
double law_max(const ScalarLaw& law);

/// Inverse-CDF sample from a uniform u in [0, 1).
double law_sample(const ScalarLaw& law, double u);

/// Law with every support point multiplied by `factor`.
ScalarLaw law_scaled(const ScalarLaw& law, double factor);

/// Reaction triggered by each intervention: the window length T, and the
/// shifts added to the base volatility and drift while the window is open.
/// The three components are independent.
struct ReactionLaw {
    ScalarLaw t_law = PointLaw{0.0};
    ScalarLaw sigma_shift_law = PointLaw{0.0};
    ScalarLaw mu_shift_law = PointLaw{0.0};

    /// No reaction: T is a point mass at zero.
    static ReactionLaw none() { return {}; }

    static ReactionLaw fixed(double t, double sigma_shift, double mu_shift) {
        return {PointLaw{t}, PointLaw{sigma_shift}, PointLaw{mu_shift}};
    }

    /// Checks support bounds and probabilities. `sigma` is the base volatility;
    /// every support point must keep sigma + shift >= 0 (> 0 when
    /// `require_positive_vol`).
    void validate(double sigma, bool require_positive_vol = true) const;

    bool is_none() const;
};

}  // namespace fxband
