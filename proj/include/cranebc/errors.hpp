#pragma once

#include <stdexcept>
#include <string>

namespace cranebc {

/// Bad run configuration (file syntax, invalid parameter, CFL precheck).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Input data violates a required identity (grid shapes, compatibility conditions).
struct ValidationError : std::invalid_argument {
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical procedure failed: divergence or non-convergence of an iteration.
struct NumericalError : std::runtime_error {
    double residual = 0.0;
    explicit NumericalError(const std::string& what, double res = 0.0)
        : std::runtime_error(what), residual(res) {}
};

}  // namespace cranebc
