#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace safe_smc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInputError : public Error {
public:
    using Error::Error;
};

/// Raised when the barrier gradient vanishes where the filter needs its direction.
class SingularGradientError : public Error {
public:
    using Error::Error;
};

/// Initial state on or outside the safe-set boundary where a strictly safe start is required.
class InitialConditionError : public Error {
public:
    using Error::Error;
};

class ConfigurationError : public Error {
public:
    using Error::Error;
};

/// Non-finite state produced by the integrator.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::size_t sample, double time)
        : Error(what), sample_(sample), time_(time) {}

    std::size_t sample() const { return sample_; }
    double time() const { return time_; }

private:
    std::size_t sample_;
    double time_;
};

/// Position-velocity pair of the double integrator.
struct PlantState {
    Vector x;
    Vector xdot;

    Eigen::Index dim() const { return x.size(); }
};

}  // namespace safe_smc
