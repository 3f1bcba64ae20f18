#pragma once

#include <stdexcept>
#include <string>

namespace omegastop {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// (alpha, rho) outside the admissible set, or an invalid killing/gain value.
class InadmissibleParameters : public Error {
public:
    using Error::Error;
};

/// Argument outside the domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Gamma function evaluated at (or within tolerance of) one of its poles.
class PoleError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Operation not defined for the regime the model/gain pair falls in.
class RegimeError : public Error {
public:
    using Error::Error;
};

/// Floating-point failure: lost accuracy, non-finite intermediate, etc.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Iterative method stopped before reaching its tolerance. Carries the best
/// value found so the caller may decide whether it is usable.
class ConvergenceError : public NumericError {
public:
    ConvergenceError(const std::string& what, double best_estimate, double error_estimate)
        : NumericError(what), best_estimate_(best_estimate), error_estimate_(error_estimate) {}

    double best_estimate() const noexcept { return best_estimate_; }
    double error_estimate() const noexcept { return error_estimate_; }

private:
    double best_estimate_;
    double error_estimate_;
};

/// Hypergeometric (or other) series failed to converge within its term budget.
class SeriesNonConvergence : public ConvergenceError {
public:
    using ConvergenceError::ConvergenceError;
};

/// Quadrature exhausted its refinement budget.
class QuadratureBudgetExceeded : public ConvergenceError {
public:
    using ConvergenceError::ConvergenceError;
};

}  // namespace omegastop
