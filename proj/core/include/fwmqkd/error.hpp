#pragma once

#include <stdexcept>
#include <string>

namespace fwmqkd {

/// Invalid argument or configuration value (non-positive width, negative delay, ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input for which the requested quantity is undefined, e.g. a contrast of two zero intensities.
class DegenerateInputError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Text that cannot be represented as 7-bit ASCII.
class EncodingError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed configuration or input file. Maps to CLI exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Filesystem failure while writing outputs. Maps to CLI exit code 3.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fwmqkd
