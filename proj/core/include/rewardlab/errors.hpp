#pragma once

#include <stdexcept>
#include <string>

namespace rewardlab {

// Malformed or schema-violating input files and configs. CLI maps this to exit 2.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure inside a solver (singular system, iteration cap, stalled pivot).
// CLI maps this to exit 3.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

// A size or enumeration guard tripped (e.g. deterministic-policy enumeration
// beyond 2^20). CLI maps this to exit 4.
class GuardError : public std::runtime_error {
public:
    explicit GuardError(const std::string& what) : std::runtime_error(what) {}
};

// An operand left the mathematical domain of a transform (log of a non-positive
// return, isoelastic at zero, quadratic past its monotone range). Treated as a
// guard violation at the CLI boundary.
class DomainError : public GuardError {
public:
    explicit DomainError(const std::string& what) : GuardError(what) {}
};

} // namespace rewardlab
