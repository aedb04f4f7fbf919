#pragma once

#include <stdexcept>
#include <string>

namespace multires {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Structural or semantic violation of a game, scenario or profile.
struct ValidationError : Error {
    using Error::Error;
};

/// File could not be read or written.
struct IoError : Error {
    using Error::Error;
};

/// Iterative solver ran out of iterations before reaching its tolerance.
struct ConvergenceError : Error {
    ConvergenceError(const std::string& what, double residual)
        : Error(what), residual(residual) {}
    double residual;
};

/// Terminal utilities still reference macro successors; zoom-in required.
struct NotGroundedError : Error {
    using Error::Error;
};

/// Zoom-out issued for a vertex that is not currently zoomed in.
struct PlanOrderError : ValidationError {
    using ValidationError::ValidationError;
};

/// Input exceeds the enumeration budget of a test oracle.
struct OracleBudgetError : Error {
    using Error::Error;
};

}  // namespace multires
