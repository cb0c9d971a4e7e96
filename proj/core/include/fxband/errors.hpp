#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fxband {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

// |r - mu| or |r - sigma^2 - 2 mu| below the denominator guard.
class DegenerateDenominator : public Error {
public:
    using Error::Error;
};

// Lognormal transition with zero variance (t * sigma2^2 == 0).
class DegenerateDistribution : public Error {
public:
    using Error::Error;
};

class UnsupportedLaw : public Error {
public:
    using Error::Error;
};

// Unknowns violate 0 < a < alpha < b.
class DomainViolation : public Error {
public:
    using Error::Error;
};

// alpha - a or b - alpha underflowed during the solve.
class OrderingCollapse : public Error {
public:
    using Error::Error;
};

class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, std::vector<double> residual_trace)
        : Error(what), trace_(std::move(residual_trace)) {}

    /// Residual norm after each accepted Newton iteration.
    const std::vector<double>& trace() const noexcept { return trace_; }

private:
    std::vector<double> trace_;
};

}  // namespace fxband
