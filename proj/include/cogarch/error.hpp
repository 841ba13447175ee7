#pragma once

#include <stdexcept>

namespace cogarch {

/// Bad input: malformed data, out-of-range parameters, violated preconditions.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation that was set up correctly but could not produce a usable number.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cogarch
