#include "lrst/errors.hpp"

namespace lrst {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_argument: return "InvalidArgument";
        case ErrorCode::parse_error: return "ParseError";
        case ErrorCode::missing_cell: return "MissingCell";
        case ErrorCode::duplicate_cell: return "DuplicateCell";
        case ErrorCode::unknown_arm: return "UnknownArm";
        case ErrorCode::non_finite_value: return "NonFiniteValue";
        case ErrorCode::all_visits_degenerate: return "AllVisitsDegenerate";
        case ErrorCode::degenerate_variance: return "DegenerateVariance";
        case ErrorCode::non_positive_variance: return "NonPositiveVariance";
        case ErrorCode::non_positive_effect: return "NonPositiveEffect";
        case ErrorCode::both_sd_zero: return "BothSdZero";
        case ErrorCode::non_psd_correlation: return "NonPSDCorrelation";
        case ErrorCode::io_error: return "IOError";
    }
    return "Unknown";
}

bool is_validation_error(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::degenerate_variance:
        case ErrorCode::non_positive_variance:
        case ErrorCode::non_positive_effect:
        case ErrorCode::io_error:
            return false;
        default:
            return true;
    }
}

}  // namespace lrst
