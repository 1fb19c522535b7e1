#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rlab {

enum class ErrorKind {
    InvalidKey,
    MessageTooLarge,
    ConfigError,
    AttackAborted,
    NotFound,
    AlreadyDeleted,
    UnrecoverableContent,
    NotDeleted,
    NoSnapshot,
    FrameError,
    ProtocolError,
    ParseError,
    InconsistentTrace,
    ValidationError,
    ImageError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so the
/// CLI can map it onto an exit code without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Parse failures additionally record the 1-based line that was rejected.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what);

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace rlab
