#pragma once

#include <stdexcept>

namespace cuspmoment {

// Raised when an input violates an operation's documented precondition.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Raised when a numerical method fails to reach its target accuracy.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cuspmoment
