#pragma once

#include <stdexcept>
#include <string>

namespace euler2d {

/// Invalid or inconsistent user configuration. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure during a run (instability, CFL violation, resource cap).
/// The CLI maps this to exit code 3.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad data fed to a diagnostic (non-finite values, mismatched grids).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Mathematical domain violation (kernel at the origin, divergent integral).
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace euler2d
