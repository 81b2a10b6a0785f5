#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qarcast {

enum class ErrorKind {
    SeriesTooShort,
    NonFinite,
    EmptyInput,
    DomainError,
    InvalidArgument,
    RankDeficient,
    NoConvergence,
    InsufficientDoF,
    ParseError,
    NonMonotoneLabels,
    EmptyFile,
    ConfigError,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

/// Library-wide exception. Every failure raised by qarcast carries a kind so
/// callers (the CLI in particular) can map it to an exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace qarcast
