#pragma once

#include <stdexcept>
#include <string>

namespace polyrpc {

enum class ErrorCode {
    UnknownMechanism,
    InvalidSelector,
    EncodingError,
    ExportError,
    UnknownType,
    MalformedWireTree,
    NotDispatchable,
    StaleReference,
    NoSuchMethod,
    RemoteError,
    Unreachable,
    ProtocolError,
    FrameTooLarge,
};

const char* to_string(ErrorCode code) noexcept;
ErrorCode error_code_from_string(const std::string& name);

/// Library-wide exception carrying a stable error code that survives the wire.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace polyrpc
