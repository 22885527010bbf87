#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dmalab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A point was required to lie in the closed domain but does not.
class DomainMembershipError : public Error {
public:
    using Error::Error;
};

/// An argument is outside its admissible range (a < 1, h <= 0, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// The second argument of F must be negative.
class SignError : public Error {
public:
    using Error::Error;
};

/// Structure constants violate a hypothesis of the construction being requested.
class RegimeError : public Error {
public:
    using Error::Error;
};

/// The boundary point and interior point of a frame coincide.
class DegenerateFrameError : public Error {
public:
    using Error::Error;
};

/// A barrier was evaluated outside the region where its closed form is defined.
class BarrierDomainError : public Error {
public:
    using Error::Error;
};

/// The lattice could not resolve the domain at the requested spacing.
class DiscretizationError : public Error {
public:
    using Error::Error;
};

/// An iterative solve did not reach its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::vector<double> residuals)
        : Error(what), residuals_(std::move(residuals)) {}

    const std::vector<double>& residuals() const noexcept { return residuals_; }

private:
    std::vector<double> residuals_;
};

/// Too few usable samples in a decay-fit window.
class WindowError : public Error {
public:
    using Error::Error;
};

/// Reading or writing an experiment file failed.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace dmalab
