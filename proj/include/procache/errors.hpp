#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace procache {

// Invalid numeric parameter passed to a model function (zero velocity,
// non-positive variance, empty support, ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// An enumeration-based routine was asked to work on an instance larger than
// its guard allows.
class CapacityError : public std::length_error {
public:
    using std::length_error::length_error;
};

// Caching gain requested while one of the file-cap sums is zero.
class UndefinedGainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Malformed configuration file. The message carries the offending field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A scenario parsed fine but broke one or more model invariants.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> violations);

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

}  // namespace procache
