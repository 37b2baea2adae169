#pragma once

#include <stdexcept>
#include <string>

namespace minerdr {

/// Base class for every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the CLI error document.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    [[nodiscard]] const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

/// Input violates an operation's precondition (too short, bad parameter, ...).
class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& message) : Error("precondition", message) {}
};

/// Malformed or inconsistent input data (parse failures, duplicates, ...).
class DataError : public Error {
public:
    explicit DataError(const std::string& message) : Error("data", message) {}
};

/// Numerically degenerate input (zero variance, rank deficiency, ...).
class DegenerateError : public Error {
public:
    explicit DegenerateError(const std::string& message) : Error("degenerate", message) {}
};

}  // namespace minerdr
