#pragma once

#include <stdexcept>
#include <string>

namespace hypsol {

// A caller broke a documented precondition (mismatched base points,
// non-monotone chart handed to the bracketing routine, ...).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// An argument lies outside the open region where a formula is defined,
// e.g. a nonpositive height in the half-space chart.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Building a profile or curve failed before it reached its stopping rule.
class ConstructionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Finite-difference partials did not span a tangent plane.
class DegeneracyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hypsol
