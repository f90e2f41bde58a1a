#pragma once

#include <stdexcept>
#include <string>

namespace tceforge {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Violated call contract (empty input, mismatched days, invalid ratios, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Malformed input files or model output that cannot be parsed.
class ParseError : public Error {
public:
    using Error::Error;
};

// Model output that parsed but violates a generation format rule; the item
// is skipped, not the run.
class FormatError : public Error {
public:
    using Error::Error;
};

// Network/backend failure after retries were exhausted.
class TransportError : public Error {
public:
    using Error::Error;
};

// Retryable flavor of TransportError (connect failures, 5xx, throttling).
class TransientError : public TransportError {
public:
    using TransportError::TransportError;
};

// Provider-reported content refusal; carries the provider message.
class RefusalError : public Error {
public:
    using Error::Error;
};

// Bad or missing configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace tceforge
