#pragma once

#include <stdexcept>
#include <string>

namespace gpmi {

/// Error categories. Values match the status codes of the C API.
enum class ErrorCode : int {
    InvalidArgument = 1,
    Io = 2,
    Parse = 3,
    Mesh = 4,
    Numeric = 5,
    Convergence = 6,
    StaleCache = 7,
    Internal = 99,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message)
        , m_code(code)
    {}

    ErrorCode code() const noexcept { return m_code; }

private:
    ErrorCode m_code;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message)
{
    if (!condition) fail(code, message);
}

} // namespace gpmi
