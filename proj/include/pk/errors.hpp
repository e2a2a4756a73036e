#pragma once

#include <stdexcept>
#include <string>

namespace pk {

// Base class for every error this library throws deliberately.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid build-time request: jet order above the compiled maximum, bad
// dimension, mismatched operand shapes.
struct ConfigError : Error {
    using Error::Error;
};

// A jet operation hit its singularity margin (division, log, fractional
// power). Carries the operation name; callers that know the chart point
// attach it when rethrowing or reporting.
struct SingularEval : Error {
    SingularEval(const std::string& op, const std::string& detail)
        : Error(op + ": " + detail), op(op) {}
    std::string op;
};

// Not enough jet orders left for a derivative-consuming operation.
struct OrderBudget : Error {
    using Error::Error;
};

// Malformed expression text or spec file.
struct ParseError : Error {
    using Error::Error;
};

// A sample point violates an exclusion margin (denominator zero set,
// coframe conditioning bound, fiber coordinate too close to 0).
struct MarginViolation : Error {
    using Error::Error;
};

// Coefficient extraction requested on a coframe that does not satisfy the
// family's adaptation conditions.
struct NotAdapted : Error {
    using Error::Error;
};

// Two independent computation paths that must agree disagreed. Signals a
// sign/convention bug, never a data problem.
struct ConventionError : Error {
    using Error::Error;
};

// Rejection sampling failed to find enough admissible points.
struct SamplingExhausted : Error {
    using Error::Error;
};

// Input violates a standing assumption of the model family.
struct AssumptionViolation : Error {
    using Error::Error;
};

}  // namespace pk
