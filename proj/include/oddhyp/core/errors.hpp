#pragma once

#include <stdexcept>
#include <string>

namespace oddhyp {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Evaluation requested closer to a pole than the configured guard.
class PoleError : public Error {
public:
    using Error::Error;
};

class AmbiguousOrder : public Error {
public:
    using Error::Error;
};

/// Mixing circular (sin/cos) and hyperbolic (sinh/cosh) expressions.
class FlavorMismatch : public Error {
public:
    using Error::Error;
};

/// A ladder step that would divide by d(lambda, k) = 0.
class DegenerateLambda : public Error {
public:
    using Error::Error;
};

class DifferentiationFailure : public Error {
public:
    using Error::Error;
};

class DecayViolation : public Error {
public:
    using Error::Error;
};

class InconsistentCalibration : public Error {
public:
    using Error::Error;
};

class InvalidTarget : public Error {
public:
    using Error::Error;
};

class ToleranceNotMet : public Error {
public:
    ToleranceNotMet(const std::string& what, double achieved)
        : Error(what + " (achieved error estimate " + std::to_string(achieved) + ")"),
          achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

class NonConvergence : public Error {
public:
    using Error::Error;
};

class DivergenceDetected : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IOError : public Error {
public:
    using Error::Error;
};

}  // namespace oddhyp
