#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mshot {

enum class ErrorCode {
    SyntaxError,
    DuplicateParam,
    UnsafeVariable,
    NonGroundTerm,
    ArityMismatch,
    ArithmeticError,
    Redefinition,
    CrossIncrementPositiveCycle,
    NotExternal,
    AlreadyDefined,
    AlreadyReleased,
    TooLarge,
    UnknownSubprogram,
    SolveAlreadyRunning,
    UnknownOption,
    ScriptError,
    MissingSubprogram,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. `code()` carries the error name
/// used throughout the API; `what()` is "<Name>: <detail>".
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail);

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode   code_;
    std::string detail_;
};

/// Positioned parse failure (1-based line and column).
class SyntaxError : public Error {
public:
    SyntaxError(int line, int column, const std::string& message);

    [[nodiscard]] int line() const noexcept { return line_; }
    [[nodiscard]] int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

using WarningSink = std::function<void(const std::string&)>;

} // namespace mshot
