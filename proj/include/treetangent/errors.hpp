#pragma once

#include <stdexcept>
#include <string>

namespace treetangent {

// Numeric failure at runtime: degenerate radicands, diverging training,
// singular linear systems, near-singular geometric series.
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad experiment configuration (unknown architecture selector, empty lists,
// unwritable output directory, ...).
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A run was refused because its estimated parameter count exceeds the cap.
class resource_limit_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// CSV/JSON input could not be parsed. line == 0 when unknown.
class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& msg, long line = 0)
        : std::runtime_error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
          line_(line) {}
    long line() const noexcept { return line_; }

private:
    long line_;
};

}  // namespace treetangent
