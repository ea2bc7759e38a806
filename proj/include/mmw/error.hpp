#pragma once

#include <stdexcept>
#include <string>

namespace mmw {

/// Malformed configuration text. Carries the 1-based line number (0 when the
/// problem is not tied to a line, e.g. a bad --override).
class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string& what)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// A parsed value violates a scenario invariant.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Solver-side failure: CFL violation, non-finite values, quadrature trouble.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mmw
