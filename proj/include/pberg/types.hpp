#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pberg {

using Complex = std::complex<double>;

/// A point of C^n, n <= 3.
using Point = Eigen::VectorXcd;

/// Base class for every failure the library reports.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: bad parameters, wrong dimensions, unknown kinds.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A linear system was numerically singular or worse than the conditioning cap.
class ConditioningError : public Error {
public:
    ConditioningError(const std::string& what, double condition)
        : Error(what + " (condition estimate " + std::to_string(condition) + ")"),
          condition_(condition) {}

    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

/// A fractional power J^{2/p} has no consistent branch on the given node set.
class BranchError : public Error {
public:
    using Error::Error;
};

/// An operation declined to run because one of its preconditions does not hold.
class RefusedError : public Error {
public:
    using Error::Error;
};

/// The optimizer could not produce a usable iterate.
class SolverError : public Error {
public:
    using Error::Error;
};

}  // namespace pberg
