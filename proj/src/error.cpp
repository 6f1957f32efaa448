#include <gpmi/error.hpp>

namespace gpmi {

const char* to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Io: return "io";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Mesh: return "mesh";
    case ErrorCode::Numeric: return "numeric";
    case ErrorCode::Convergence: return "convergence";
    case ErrorCode::StaleCache: return "stale_cache";
    case ErrorCode::Internal: return "internal";
    }
    return "unknown";
}

void fail(ErrorCode code, const std::string& message)
{
    throw Error(code, message);
}

} // namespace gpmi
