// Exception hierarchy shared by all cfc components.

#pragma once

#include <stdexcept>
#include <string>

namespace cfc {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad configuration or argument values (maps to CLI usage errors).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// File system level failures: missing files, unreadable paths.
class IoError : public Error {
public:
    using Error::Error;
};

/// Schema definition or schema/data mismatch problems.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Malformed data content (bad rows, arity mismatches, unknown classes).
class DataError : public Error {
public:
    using Error::Error;
};

/// Model file parsing, version, or checksum failures.
class ModelFormatError : public Error {
public:
    using Error::Error;
};

/// A fuzzy cluster lost all membership mass; the caller reinitializes it.
class DegenerateClusterError : public Error {
public:
    explicit DegenerateClusterError(std::size_t cluster, const std::string& what)
        : Error(what), cluster_(cluster) {}

    std::size_t cluster() const { return cluster_; }

private:
    std::size_t cluster_;
};

} // namespace cfc
