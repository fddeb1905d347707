#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hjlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid arguments or violated type invariants.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A region of interest does not intersect the sampled lattice.
class EmptyIntersection : public Error {
public:
    using Error::Error;
};

/// Field or chain does not cover the domain an operation needs.
class DomainMismatch : public Error {
public:
    using Error::Error;
};

/// Exponent outside 1 < p < N, where the regularity machinery does not apply.
class OutOfTheoremScope : public Error {
public:
    using Error::Error;
};

/// A numerical routine (root finding, minimisation) failed to converge.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// The explicit scheme had to abort; carries the step index.
class SolverError : public Error {
public:
    SolverError(const std::string& what, std::size_t step)
        : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// A checked precondition does not hold on the data.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A zoom produced a field leaving the growth envelope; carries the witness cell.
class EnvelopeError : public Error {
public:
    EnvelopeError(const std::string& what, double t, std::vector<double> x, double value, double bound)
        : Error(what), t_(t), x_(std::move(x)), value_(value), bound_(bound) {}

    double t() const noexcept { return t_; }
    const std::vector<double>& x() const noexcept { return x_; }
    double value() const noexcept { return value_; }
    double bound() const noexcept { return bound_; }

private:
    double t_;
    std::vector<double> x_;
    double value_;
    double bound_;
};

}  // namespace hjlab
