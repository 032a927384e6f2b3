#pragma once

#include <stdexcept>
#include <string>

namespace rapm {

/// Malformed or missing input (bad file, missing column, invalid value).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inconsistent or incomplete run configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure could not produce a usable result.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace rapm
