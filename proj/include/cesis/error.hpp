#pragma once

#include <stdexcept>
#include <string>

namespace cesis {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration file, key, or value.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Invalid argument to a model or density operation.
class InputError : public Error {
public:
    explicit InputError(const std::string& msg) : Error(msg) {}
};

// Numerical breakdown: non-PD covariance, quadrature failure, underflow.
class NumericsError : public Error {
public:
    explicit NumericsError(const std::string& msg) : Error(msg) {}
};

// Mixture fitting failed (degenerate component, no effective samples).
class FitError : public Error {
public:
    explicit FitError(const std::string& msg) : Error(msg) {}
};

}  // namespace cesis
