#pragma once

#include <stdexcept>
#include <string>

namespace ellin {

// Base for all library failures so callers can catch one type.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operand shapes disagree (vector length vs matrix order, pair dimensions).
struct DimensionMismatch : Error {
    using Error::Error;
};

// A Cholesky pivot fell below the positivity threshold; the matrix is not a
// valid ellipsoid shape.
struct NotPositiveDefinite : Error {
    using Error::Error;
};

// The iterative eigensolver exhausted its sweep budget.
struct NoConvergence : Error {
    using Error::Error;
};

// A triangular solve met a (near-)zero diagonal entry.
struct SingularFactor : Error {
    using Error::Error;
};

// The dual function was evaluated outside its domain, including at the pole
// when the domain is open at the left endpoint.
struct OutOfDomain : Error {
    using Error::Error;
};

// Contact points were requested for a pair whose optimum is not at the
// touching level within tolerance.
struct NotTouching : Error {
    using Error::Error;
};

// The degenerate contact quadratic has no real root; the pair is not in
// contact along the requested nullspace direction.
struct NoRealRoot : Error {
    using Error::Error;
};

// A violation ellipsoid was requested for the zero disturbance vertex.
struct ZeroDisturbance : Error {
    using Error::Error;
};

// The 1-D closed form needs a positive curvature parameter.
struct NonPositiveLambda : Error {
    using Error::Error;
};

// Malformed input document (CLI front end).
struct ParseError : Error {
    using Error::Error;
};

}  // namespace ellin
