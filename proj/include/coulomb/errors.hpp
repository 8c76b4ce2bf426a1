#pragma once

#include <stdexcept>
#include <string>

namespace coulomb {

enum class ErrorCode {
    invalid_formation,  // fewer than two spacecraft, bad dimension, size mismatch
    singular_geometry,  // coincident (or nearly coincident) spacecraft
    singular_system,    // rank-deficient linear system
    invalid_input,      // malformed argument (negative epsilon, non-PSD input, ...)
    numerical_failure,  // iteration cap reached
    undefined_metric,   // percent error of a zero command
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_formation: return "invalid formation";
        case ErrorCode::singular_geometry: return "singular geometry";
        case ErrorCode::singular_system: return "singular system";
        case ErrorCode::invalid_input: return "invalid input";
        case ErrorCode::numerical_failure: return "numerical failure";
        case ErrorCode::undefined_metric: return "undefined metric";
    }
    return "unknown error";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace coulomb
