#pragma once

#include <stdexcept>
#include <string>

namespace ctikit {

/// Machine-readable error categories. Values double as process exit codes.
enum class ErrorCode : int {
    Usage = 2,
    Config = 3,
    Io = 4,
    Parse = 5,
    InvalidArgument = 6,
    Credential = 7,
    Network = 8,
    Domain = 9,  // input violates an operation's precondition
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised by line-oriented readers; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& fragment, const std::string& reason)
        : Error(ErrorCode::Parse, "line " + std::to_string(line) + ": " + reason +
                                      " near '" + fragment + "'"),
          line_(line), fragment_(fragment) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& fragment() const noexcept { return fragment_; }

private:
    std::size_t line_;
    std::string fragment_;
};

}  // namespace ctikit
