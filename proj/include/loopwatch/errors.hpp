#pragma once

#include <stdexcept>
#include <string>

namespace loopwatch {

// Input stream could not be parsed. Carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    int line() const { return line_; }

private:
    int line_;
};

// Network violates a structural invariant (self-loop, duplicate baseline,
// disconnected component where connectivity is required).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numeric evaluation would leave the double range.
class OverflowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A symbolic computation exceeded its term budget.
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An operation was invoked outside its contract.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace loopwatch
