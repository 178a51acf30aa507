#include <mshot/error.hpp>

namespace mshot {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::DuplicateParam: return "DuplicateParam";
        case ErrorCode::UnsafeVariable: return "UnsafeVariable";
        case ErrorCode::NonGroundTerm: return "NonGroundTerm";
        case ErrorCode::ArityMismatch: return "ArityMismatch";
        case ErrorCode::ArithmeticError: return "ArithmeticError";
        case ErrorCode::Redefinition: return "Redefinition";
        case ErrorCode::CrossIncrementPositiveCycle: return "CrossIncrementPositiveCycle";
        case ErrorCode::NotExternal: return "NotExternal";
        case ErrorCode::AlreadyDefined: return "AlreadyDefined";
        case ErrorCode::AlreadyReleased: return "AlreadyReleased";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::UnknownSubprogram: return "UnknownSubprogram";
        case ErrorCode::SolveAlreadyRunning: return "SolveAlreadyRunning";
        case ErrorCode::UnknownOption: return "UnknownOption";
        case ErrorCode::ScriptError: return "ScriptError";
        case ErrorCode::MissingSubprogram: return "MissingSubprogram";
    }
    return "Error";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code), detail_(detail) {}

SyntaxError::SyntaxError(int line, int column, const std::string& message)
    : Error(ErrorCode::SyntaxError, std::to_string(line) + ":" + std::to_string(column) + ": " + message)
    , line_(line)
    , column_(column) {}

} // namespace mshot
