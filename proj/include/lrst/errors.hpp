#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lrst {

enum class ErrorCode {
    invalid_argument,
    parse_error,
    missing_cell,
    duplicate_cell,
    unknown_arm,
    non_finite_value,
    all_visits_degenerate,
    degenerate_variance,
    non_positive_variance,
    non_positive_effect,
    both_sd_zero,
    non_psd_correlation,
    io_error,
};

/// Machine-readable name, e.g. "MissingCell".
std::string_view to_string(ErrorCode code) noexcept;

/// True for errors caused by bad input (flags, files, scenarios) rather than
/// by a computation that could not be completed.
bool is_validation_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace lrst
