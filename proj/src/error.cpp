#include "rlab/error.hpp"

namespace rlab {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidKey: return "InvalidKey";
    case ErrorKind::MessageTooLarge: return "MessageTooLarge";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::AttackAborted: return "AttackAborted";
    case ErrorKind::NotFound: return "NotFound";
    case ErrorKind::AlreadyDeleted: return "AlreadyDeleted";
    case ErrorKind::UnrecoverableContent: return "UnrecoverableContent";
    case ErrorKind::NotDeleted: return "NotDeleted";
    case ErrorKind::NoSnapshot: return "NoSnapshot";
    case ErrorKind::FrameError: return "FrameError";
    case ErrorKind::ProtocolError: return "ProtocolError";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InconsistentTrace: return "InconsistentTrace";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::ImageError: return "ImageError";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

ParseError::ParseError(std::size_t line, const std::string& what)
    : Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + what), line_(line) {}

}  // namespace rlab
