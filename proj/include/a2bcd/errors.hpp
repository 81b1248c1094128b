#pragma once

#include <stdexcept>
#include <string>

namespace a2bcd {

// Numeric breakdown at runtime (degenerate reconstruction matrix, unstable
// integration step, nonpositive metric in a log fit, ...).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input text; carries the 1-based line number.
struct ParseError : std::runtime_error {
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(what + " at line " + std::to_string(line)), line_number(line) {}
    std::size_t line_number;
};

}  // namespace a2bcd
