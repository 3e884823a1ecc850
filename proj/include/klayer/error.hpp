#pragma once

#include <stdexcept>
#include <string>

namespace klayer {

enum class ErrorCode {
    InvalidArgument = 1,
    NoConvergence,
    BracketFailure,
    NoCrossing,
    TimeStep,
    Positivity,
    Singularity,
    Io,
    Config,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so that
// the C layer can map it without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, const std::string& message) {
    if (!condition) fail(ErrorCode::InvalidArgument, message);
}

}  // namespace klayer
