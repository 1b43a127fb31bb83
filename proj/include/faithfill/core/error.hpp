#pragma once

#include <stdexcept>
#include <string>

namespace faithfill {

/// Bad input, config or on-disk data. The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Failure while running a stage (backend crash, NaN loss, I/O error after
/// validation). The CLI maps this to exit code 2.
class RuntimeFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace faithfill
