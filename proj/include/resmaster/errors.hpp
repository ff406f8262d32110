// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace resmaster {

// Bad shapes, out-of-range parameters, inconsistent dimensions.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Patch geometry that does not tile the grid exactly.
class GeometryError : public InvalidArgument {
public:
    GeometryError(const std::string& axis, const std::string& message)
        : InvalidArgument(message), axis_(axis) {}

    const std::string& axis() const noexcept { return axis_; }

private:
    std::string axis_;
};

// A result that should be real (or otherwise consistent) numerically is not.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace resmaster
