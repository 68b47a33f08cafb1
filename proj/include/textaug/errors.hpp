#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace textaug {

// Base for all library errors. CLI maps ConfigError/UsageError to exit
// code 2, everything else to 1.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad configuration, unknown method names, missing resource paths.
struct ConfigError : Error {
    using Error::Error;
};

// Malformed input data: datasets, vector files, tables.
struct IngestError : Error {
    using Error::Error;
};

// Violated numeric-domain preconditions (zero vectors, dim mismatch).
struct DomainError : Error {
    using Error::Error;
};

// Metric preconditions (empty reference class, non-finite features).
struct MetricError : Error {
    using Error::Error;
};

// Remote service failed after all retries, or offline cache miss.
struct ServiceError : Error {
    using Error::Error;
};

// Authentication rejected by the remote service; never retried.
struct AuthError : Error {
    using Error::Error;
};

// Numbered-list response held fewer items than requested. Carries what
// was parsed so the caller can decide to re-ask.
struct ParseShortfall : Error {
    ParseShortfall(std::string message, std::vector<std::string> items)
        : Error(std::move(message)), parsed(std::move(items)) {}
    std::vector<std::string> parsed;
};

// No numbered items at all.
struct ParseFailure : Error {
    using Error::Error;
};

// Classification response matched no known class. Keeps the raw reply.
struct UnmatchedError : Error {
    UnmatchedError(std::string message, std::string reply)
        : Error(std::move(message)), raw(std::move(reply)) {}
    std::string raw;
};

}  // namespace textaug
