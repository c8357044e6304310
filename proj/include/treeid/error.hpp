#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace treeid {

// Base of every error thrown by the library. The CLI maps UsageError to exit
// status 1 and everything else to exit status 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

class MalformedGraph : public Error {
public:
    using Error::Error;
};

class LookupError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

// A required edge set that already contains a cycle.
class InfeasibleConstraint : public Error {
public:
    using Error::Error;
};

class InvalidPlacement : public Error {
public:
    using Error::Error;
};

// Measurements that no spanning tree can explain.
class InconsistentObservation : public Error {
public:
    using Error::Error;
};

class NoFeasibleHypothesis : public Error {
public:
    using Error::Error;
};

class UnsupportedConfiguration : public Error {
public:
    using Error::Error;
};

class ModelError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class InternalInvariantViolation : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace treeid
