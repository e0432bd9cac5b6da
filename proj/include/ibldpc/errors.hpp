#pragma once

#include <stdexcept>
#include <string>

namespace ibldpc {

/// Input data violates a structural invariant (non-normalized joint, NaN sample, ...).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller-supplied parameter is out of its admissible range.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An operation precondition on the data (ordering, shape) does not hold.
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Malformed external input: alist text, family files, table artifacts.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Offline table synthesis could not produce a usable decoder.
class DesignError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inconsistent runtime configuration (missing rate point, bad campaign file).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ibldpc
