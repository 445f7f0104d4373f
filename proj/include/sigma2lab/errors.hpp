#pragma once

#include <stdexcept>
#include <string>

namespace sigma2lab {

// Base class for all failures that are scientific rather than usage errors.
// The CLI maps these to exit code 1; malformed input maps to exit code 2.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// rho >= 2: no entire solution exists (the admissible slope interval is empty).
struct NonexistenceError : Error {
    using Error::Error;
};

// Gauge value epsilon outside the admissible interval, or the integration
// left the positive cone where it should not have.
struct GaugeError : Error {
    using Error::Error;
};

struct ConeViolationError : Error {
    using Error::Error;
};

// Level t outside the attainable range, or a level set touching the grid
// boundary.
struct DomainError : Error {
    using Error::Error;
};

// Operation requires f(u) = (3/2) e^{4u} (constant p) and got something else.
struct UnsupportedFError : Error {
    using Error::Error;
};

// Frame decomposition requested at a (near-)critical point.
struct CriticalPointError : Error {
    using Error::Error;
};

// Grid index too close to a face for the requested stencil.
struct IndexError : Error {
    using Error::Error;
};

struct ConvergenceError : Error {
    using Error::Error;
};

}  // namespace sigma2lab
