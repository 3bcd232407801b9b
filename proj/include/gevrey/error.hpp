#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gevrey {

enum class ErrorCode {
    Domain,
    SizeMismatch,
    FitUnderdetermined,
    NoDecay,
    Unresolved,
    Diverged,
    MeanMode,
    CflViolation,
    NanDetected,
    EmptyTrace,
    Gap,
    StepUnderflow,
    Parse,
    Config,
    Io,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::Domain: return "DOMAIN";
    case ErrorCode::SizeMismatch: return "SIZE_MISMATCH";
    case ErrorCode::FitUnderdetermined: return "FIT_UNDERDETERMINED";
    case ErrorCode::NoDecay: return "NO_DECAY";
    case ErrorCode::Unresolved: return "UNRESOLVED";
    case ErrorCode::Diverged: return "DIVERGED";
    case ErrorCode::MeanMode: return "MEAN_MODE";
    case ErrorCode::CflViolation: return "CFL_VIOLATION";
    case ErrorCode::NanDetected: return "NAN_DETECTED";
    case ErrorCode::EmptyTrace: return "EMPTY_TRACE";
    case ErrorCode::Gap: return "GAP";
    case ErrorCode::StepUnderflow: return "STEP_UNDERFLOW";
    case ErrorCode::Parse: return "PARSE";
    case ErrorCode::Config: return "CONFIG";
    case ErrorCode::Io: return "IO";
    }
    return "UNKNOWN";
}

/// Every module reports failures through this one exception type; the
/// harness turns `code()` into its machine-readable error record.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
    if (!cond) fail(code, what);
}

}  // namespace gevrey
