#pragma once

#include <stdexcept>
#include <string>

namespace nystrom {

/** Failure categories, mapped onto process exit codes by the CLI. */
enum class ErrorKind {
    invalid_argument,  // caller passed an out-of-contract value
    invalid_input,     // data violates a documented invariant (asymmetry, non-finite, ...)
    io,                // file could not be opened / read / written
    parse,             // file opened but its contents are malformed
    numerical,         // a numerical routine failed to converge or produced non-finite output
};

/** Base exception for everything thrown by this library. */
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InvalidArgumentError : public Error {
public:
    explicit InvalidArgumentError(const std::string& msg)
        : Error(ErrorKind::invalid_argument, msg) {}
};

class InvalidInputError : public Error {
public:
    explicit InvalidInputError(const std::string& msg)
        : Error(ErrorKind::invalid_input, msg) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(ErrorKind::io, msg) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(ErrorKind::parse, msg) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& msg)
        : Error(ErrorKind::numerical, msg) {}
};

/** Exit code the CLI uses for a given failure category. */
inline int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::invalid_argument:
        case ErrorKind::invalid_input:
            return 2;
        case ErrorKind::io:
        case ErrorKind::parse:
            return 3;
        case ErrorKind::numerical:
            return 4;
    }
    return 4;
}

namespace detail {

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
    if (!cond) throw Error(kind, msg);
}

inline void require_arg(bool cond, const std::string& msg) {
    if (!cond) throw InvalidArgumentError(msg);
}

inline void require_input(bool cond, const std::string& msg) {
    if (!cond) throw InvalidInputError(msg);
}

}  // namespace detail

}  // namespace nystrom
