#pragma once

#include <stdexcept>
#include <string>

namespace isotherm {

enum class ErrorKind {
    coverage,
    unsupported_kind,
    off_surface,
    geometry,
    domain,
    solver,
    configuration,
    schedule,
    resolution,
    precondition,
    inconsistency,
    transfer_undefined,
    undefined_profile,
    theorem_inapplicable,
    schema,
    io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` tells callers which
/// contract was violated.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind)
    {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message)
{
    throw Error(kind, message);
}

}  // namespace isotherm
