#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sreach {

/// Malformed FMDP / reachable-set text. Carries a 1-based source position.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
          line_(line), column_(column) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Structurally well-formed input that violates a model invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A configured size bound (compound domain, candidate budget, enumeration cap) was exceeded.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A state set handed to the solver is not closed under the transition relation.
class ClosureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace sreach
