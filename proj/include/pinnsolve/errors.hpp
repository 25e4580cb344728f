#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pinnsolve {

/// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorCategory {
    Config,         // malformed or inconsistent configuration
    Parse,          // equation / expression syntax
    Admissibility,  // constraint mode not available for the problem kind
    Divergence,     // non-finite loss or gradient during training
    Domain,         // arithmetic domain error during evaluation
    Argument,       // invalid call arguments
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

/// Expression syntax or lexical error with the 0-based source offset.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(ErrorCategory::Parse,
                what + " at position " + std::to_string(position)),
          position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Arithmetic domain error. `where` is a node index (scalar tapes) or a
/// point index (batched evaluation).
class DomainError : public Error {
public:
    DomainError(const std::string& what, std::size_t where)
        : Error(ErrorCategory::Domain, what + " (index " + std::to_string(where) + ")"),
          where_(where) {}

    std::size_t where() const noexcept { return where_; }

private:
    std::size_t where_;
};

/// One diagnostic of a static check.
struct Issue {
    ErrorCategory category;
    std::string message;
};

class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::size_t epoch)
        : Error(ErrorCategory::Divergence, what + " at epoch " + std::to_string(epoch)),
          epoch_(epoch) {}

    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

}  // namespace pinnsolve
