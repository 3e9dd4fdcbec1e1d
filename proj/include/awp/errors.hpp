#pragma once

#include <stdexcept>
#include <string>

namespace awp {

/// Base class for all errors raised by the library.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid inputs: bad shapes, malformed files, inconsistent configuration.
/// The CLI maps these to exit code 2.
class config_error : public error {
public:
    explicit config_error(const std::string& msg) : error(msg) {}
};

/// Numerical failures: non-finite values, divergence, non-convergence,
/// singular systems. The CLI maps these to exit code 3.
class numeric_error : public error {
public:
    explicit numeric_error(const std::string& msg) : error(msg) {}
};

}  // namespace awp
