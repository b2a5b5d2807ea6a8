#pragma once

#include <stdexcept>
#include <string>

namespace streamscribe {

enum class ErrorCode {
    invalid_argument,
    config,
    size,
    sequence,
    io,
    address_in_use,
    backend,
    backend_timeout,
    backend_protocol,
    backend_crashed,
    invalid_state,
    not_found,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

    // Timeouts may succeed on a later request; everything else is terminal
    // for the request that raised it.
    bool retryable() const noexcept { return code_ == ErrorCode::backend_timeout; }

private:
    ErrorCode code_;
};

}  // namespace streamscribe
