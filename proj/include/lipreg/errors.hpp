#pragma once

#include <stdexcept>
#include <string>

namespace lipreg {

// Bad arguments, malformed data, violated preconditions.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// File parse/format failures. Messages name the offending row where known.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical solver failures (singular system, non-convergence).
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& msg, double residual)
        : std::runtime_error(msg), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

} // namespace lipreg
