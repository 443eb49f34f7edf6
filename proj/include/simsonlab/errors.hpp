#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace simsonlab {

enum class ErrorCode {
    InvalidArgument,
    CoincidentPoints,
    NearParallel,
    DegenerateCloud,
    CollinearInput,
    TooFewSamples,
    SchemaError,
    RangeError,
    InconsistentArtifacts,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::CoincidentPoints: return "CoincidentPoints";
    case ErrorCode::NearParallel: return "NearParallel";
    case ErrorCode::DegenerateCloud: return "DegenerateCloud";
    case ErrorCode::CollinearInput: return "CollinearInput";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::RangeError: return "RangeError";
    case ErrorCode::InconsistentArtifacts: return "InconsistentArtifacts";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-readable code.
/// Scene validation errors also carry the dotted path of the offending field.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string path = {})
        : std::runtime_error(format(code, message, path)), code_(code), path_(std::move(path)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& path() const noexcept { return path_; }

private:
    static std::string format(ErrorCode code, const std::string& message, const std::string& path) {
        std::string out{to_string(code)};
        if (!path.empty()) out += " at '" + path + "'";
        out += ": " + message;
        return out;
    }

    ErrorCode code_;
    std::string path_;
};

} // namespace simsonlab
