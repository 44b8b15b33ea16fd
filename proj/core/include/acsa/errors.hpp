#pragma once

#include <stdexcept>
#include <string>

namespace acsa {

/// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad CLI usage or invalid configuration (exit code 1).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent input data (exit code 2).
class DataError : public Error {
public:
    using Error::Error;
};

/// Token spans and parsed character spans disagree; scoring must not
/// silently continue past this.
class AlignmentError : public DataError {
public:
    using DataError::DataError;
};

/// Failure talking to a generation or embedding endpoint (exit code 3).
class BackendError : public Error {
public:
    using Error::Error;
};

/// Retryable transport problem (connect failure, timeout, 5xx).
class TransportError : public BackendError {
public:
    using BackendError::BackendError;
};

/// The endpoint answered but cannot serve the experiment, e.g. no
/// token log-probabilities in the response. Never retried.
class CapabilityError : public BackendError {
public:
    using BackendError::BackendError;
};

}  // namespace acsa
