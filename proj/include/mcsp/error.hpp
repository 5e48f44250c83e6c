#pragma once

#include <stdexcept>
#include <string>

namespace mcsp {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A configured size cap (enumeration, lifting, core check) was exceeded.
class CapExceeded : public Error {
public:
    using Error::Error;
};

// Input violates a documented precondition or type invariant.
class InvalidInput : public Error {
public:
    using Error::Error;
};

// Text file could not be parsed; message carries the line number.
class ParseError : public Error {
public:
    ParseError(int line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

// An internal consistency check failed. Indicates a bug or a violated
// mathematical precondition, never bad user input.
class InternalError : public Error {
public:
    using Error::Error;
};

} // namespace mcsp
