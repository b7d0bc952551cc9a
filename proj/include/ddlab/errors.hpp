#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace ddlab {

// Common base for all library errors. `name()` carries the machine-readable
// error tag that the CLI prints on stderr; `what()` carries the diagnostic.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& what)
        : std::runtime_error(what), name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

// Inputs violate a documented precondition or file-format contract.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error("ValidationError", what) {}
};

// Drift/volatility evaluation produced a non-finite value or sigma <= 0.
class NonFiniteCoefficient : public Error {
public:
    explicit NonFiniteCoefficient(const std::string& what) : Error("NonFiniteCoefficient", what) {}
};

// The two-point boundary value solve failed its convergence checks.
class SolveDiverged : public Error {
public:
    explicit SolveDiverged(const std::string& what) : Error("SolveDiverged", what) {}
};

// Adaptive quadrature exceeded its subdivision cap.
class QuadratureFailed : public Error {
public:
    explicit QuadratureFailed(const std::string& what) : Error("QuadratureFailed", what) {}
};

// A finite-difference integrand that must be a defective density went
// materially negative; signals a numerics fault.
class NegativeIntegrand : public Error {
public:
    explicit NegativeIntegrand(const std::string& what) : Error("NegativeIntegrand", what) {}
};

// An improper integral could not be truncated before hitting its cap.
class TruncationNotConverged : public Error {
public:
    explicit TruncationNotConverged(const std::string& what) : Error("TruncationNotConverged", what) {}
};

// Double-series evaluation grew without bound or produced a value that is
// too negative to be truncation noise.
class SeriesDiverged : public Error {
public:
    explicit SeriesDiverged(const std::string& what) : Error("SeriesDiverged", what) {}
};

// A transform evaluator returned non-finite values on the inversion contour.
class EvaluatorFailed : public Error {
public:
    explicit EvaluatorFailed(const std::string& what) : Error("EvaluatorFailed", what) {}
};

// A tabulated start density does not integrate to one.
class DensityNotNormalized : public Error {
public:
    explicit DensityNotNormalized(const std::string& what) : Error("DensityNotNormalized", what) {}
};

// A simulated path left the model's state interval.
class StateLeftInterval : public Error {
public:
    explicit StateLeftInterval(const std::string& what) : Error("StateLeftInterval", what) {}
};

// The requested combination of model and operation is not offered.
class NotSupported : public Error {
public:
    explicit NotSupported(const std::string& what) : Error("NotSupported", what) {}
};

}  // namespace ddlab
