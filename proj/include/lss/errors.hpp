#pragma once

#include <stdexcept>
#include <string>

namespace lss {

/// Failure category; the CLI maps each one to a process exit code.
enum class ErrorKind { Validation, Io, Divergence };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

class DivergenceError : public Error {
public:
    explicit DivergenceError(const std::string& what) : Error(ErrorKind::Divergence, what) {}
};

/// Malformed text input; carries the 1-based offending line.
class ParseError : public ValidationError {
public:
    ParseError(std::size_t line, const std::string& what)
        : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class CorruptFileError : public IoError {
public:
    explicit CorruptFileError(const std::string& what) : IoError("corrupt file: " + what) {}
};

class ShapeMismatchError : public IoError {
public:
    explicit ShapeMismatchError(const std::string& what) : IoError("shape mismatch: " + what) {}
};

class VersionError : public IoError {
public:
    explicit VersionError(const std::string& what) : IoError("version mismatch: " + what) {}
};

}  // namespace lss
