#pragma once

#include <stdexcept>
#include <string>

namespace conflab {

// Invalid argument shapes or ranges (degree, index, grid size).
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Input outside the domain where a statement is asserted, e.g. a vector
// outside the positive cone, or a non-positive elementary symmetric value.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Non-finite or degenerate numbers encountered while evaluating a state.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A conformal factor left the admissible cone (v_m > 0, L > 0).
struct ConeError : DomainError {
    using DomainError::DomainError;
};

// Radial or tangential Ricci eigenvalue was not positive.
struct RicciPositivityError : DomainError {
    using DomainError::DomainError;
};

// The segment s -> s*u left the cone at Gauss node s.
struct PathError : ConeError {
    double s;
    PathError(const std::string& what, double s_) : ConeError(what), s(s_) {}
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace conflab
