#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eyas {

enum class ErrorCode {
    invalid_argument,
    bounds,
    dimension_mismatch,
    unsupported_format,
    decode,
    io,
    degenerate_template,
    out_of_view,
    segmentation_empty,
    degenerate_mask,
    classification_failed,
    insufficient_vessels,
    roi_too_small,
    format,
    undefined_metric,
    unknown_label,
    length_mismatch,
    empty_report,
    state,
    conflict,
    not_found,
    pending,
    payload_too_large,
    backend_failure,
    missing_labels,
    timeout,
    internal,
};

/// Stable snake_case identifier, used in JSON error bodies and CLI output.
std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace eyas
