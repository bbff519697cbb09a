#pragma once

#include <stdexcept>
#include <string>

namespace mome {

/// Precondition violated by the caller (dimension mismatch, bad sizes, ...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Sampling was requested from an archive with no stored solution.
class EmptyArchive : public std::runtime_error {
public:
    EmptyArchive() : std::runtime_error("archive has no non-empty cell") {}
};

/// Exact hypervolume is only implemented for two objectives.
class UnsupportedDimension : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Paired sample where every difference is zero.
class DegenerateSample : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad or unknown configuration, detected before any compute.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace mome
