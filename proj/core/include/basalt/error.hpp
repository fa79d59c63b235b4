#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace basalt {

/// Invalid parameters or configuration supplied by the caller.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A protocol state that cannot be acted upon (e.g. selecting from an empty view).
class ProtocolError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Argument outside the mathematical domain of an analytical formula.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Fixed-step integration left the admissible state space.
class StepSizeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data. `row()` is the 1-based line number in
/// the source file, or 0 when the problem is not tied to one line.
class DataError : public std::runtime_error {
public:
    DataError(const std::string& what, std::size_t row = 0)
        : std::runtime_error(row == 0 ? what : "row " + std::to_string(row) + ": " + what), row_(row) {}

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

} // namespace basalt
