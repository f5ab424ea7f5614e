#pragma once

#include <stdexcept>
#include <string>

namespace growseg {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed header, config or JSON document.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Data length disagrees with the declared dimensions.
class SizeError : public Error {
public:
    using Error::Error;
};

/// Non-finite or out-of-domain numeric value.
class ValueError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// No seed region survived (or none was labeled).
class EmptySeedsError : public Error {
public:
    using Error::Error;
};

class EmptyInputError : public Error {
public:
    using Error::Error;
};

/// A pipeline stage was asked to run before its inputs exist.
class DependencyError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Wraps any failure inside a pipeline stage, remembering which stage failed.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& cause)
        : Error("stage '" + stage + "' failed: " + cause), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace growseg
