#pragma once

#include <vector>

namespace fxband {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(int n);

    int size() const noexcept { return static_cast<int>(nodes.size()); }
};

/// Cached rule; the returned reference stays valid for the program lifetime.
const GaussLegendre& gauss_legendre(int n);

}  // namespace fxband
