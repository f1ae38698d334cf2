#pragma once

#include <stdexcept>
#include <string>

namespace pcrlab {

// Invalid value for an algorithm parameter (p < 1, a <= 1, alpha <= 1, ...).
class invalid_parameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Structurally invalid input data (empty sample set, dimension mismatch, ...).
class invalid_input : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A spectral specification that fails its own validity requirements
// (non-trace-class eigenvalue sequence, non-positive entries, ...).
class invalid_spec : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A request that is well-formed but outside what the implementation supports
// (e.g. asymptotic exponents for non-power spectral families).
class unsupported_spec : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Numerical breakdown: quadrature non-convergence, overflow, failed solve.
class numeric_failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A closed-form bound evaluated below its validity threshold in n.
// Carries the threshold so callers can move to admissible n.
class below_threshold : public std::runtime_error {
public:
    below_threshold(const std::string& what, double threshold)
        : std::runtime_error(what), threshold_(threshold) {}
    double threshold() const noexcept { return threshold_; }

private:
    double threshold_;
};

// Run-level failure of a Monte Carlo experiment (too many flagged replications).
class run_failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace pcrlab
