#include "polyrpc/errors.hpp"

namespace polyrpc {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::UnknownMechanism: return "UnknownMechanism";
        case ErrorCode::InvalidSelector: return "InvalidSelector";
        case ErrorCode::EncodingError: return "EncodingError";
        case ErrorCode::ExportError: return "ExportError";
        case ErrorCode::UnknownType: return "UnknownType";
        case ErrorCode::MalformedWireTree: return "MalformedWireTree";
        case ErrorCode::NotDispatchable: return "NotDispatchable";
        case ErrorCode::StaleReference: return "StaleReference";
        case ErrorCode::NoSuchMethod: return "NoSuchMethod";
        case ErrorCode::RemoteError: return "RemoteError";
        case ErrorCode::Unreachable: return "Unreachable";
        case ErrorCode::ProtocolError: return "ProtocolError";
        case ErrorCode::FrameTooLarge: return "FrameTooLarge";
    }
    return "UnknownError";
}

ErrorCode error_code_from_string(const std::string& name) {
    for (int i = 0; i <= static_cast<int>(ErrorCode::FrameTooLarge); ++i) {
        auto code = static_cast<ErrorCode>(i);
        if (name == to_string(code)) return code;
    }
    return ErrorCode::RemoteError;
}

}  // namespace polyrpc
