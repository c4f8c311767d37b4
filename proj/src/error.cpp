#include "zml/error.hpp"

namespace zml {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::PoleAt1: return "PoleAt1";
        case ErrorCode::PoleAtNonPositiveInteger: return "PoleAtNonPositiveInteger";
        case ErrorCode::AccuracyUnreachable: return "AccuracyUnreachable";
        case ErrorCode::Overflow: return "Overflow";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::NotAbsolutelyConvergent: return "NotAbsolutelyConvergent";
        case ErrorCode::DeskScaleExceeded: return "DeskScaleExceeded";
        case ErrorCode::IllConditionedFit: return "IllConditionedFit";
        case ErrorCode::TooCloseToAbscissa: return "TooCloseToAbscissa";
        case ErrorCode::TruncationNotClosed: return "TruncationNotClosed";
        case ErrorCode::NotMonotone: return "NotMonotone";
        case ErrorCode::InsufficientRange: return "InsufficientRange";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace zml
