#include "streamscribe/error.hpp"

namespace streamscribe {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::config: return "config";
        case ErrorCode::size: return "size";
        case ErrorCode::sequence: return "sequence";
        case ErrorCode::io: return "io";
        case ErrorCode::address_in_use: return "address_in_use";
        case ErrorCode::backend: return "backend";
        case ErrorCode::backend_timeout: return "backend_timeout";
        case ErrorCode::backend_protocol: return "backend_protocol";
        case ErrorCode::backend_crashed: return "backend_crashed";
        case ErrorCode::invalid_state: return "invalid_state";
        case ErrorCode::not_found: return "not_found";
    }
    return "unknown";
}

}  // namespace streamscribe
