#include "clparam/error.hpp"

namespace clp {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::NonInvertibleFeedthrough: return "NonInvertibleFeedthrough";
        case ErrorCode::UnstableSystem: return "UnstableSystem";
        case ErrorCode::PlantNotStrictlyProper: return "PlantNotStrictlyProper";
        case ErrorCode::PlantUnstable: return "PlantUnstable";
        case ErrorCode::NotStateFeedback: return "NotStateFeedback";
        case ErrorCode::HorizonTooShort: return "HorizonTooShort";
        case ErrorCode::UnsupportedDirection: return "UnsupportedDirection";
        case ErrorCode::Infeasible: return "Infeasible";
        case ErrorCode::Y0NotIdentity: return "Y0NotIdentity";
        case ErrorCode::R1NotIdentity: return "R1NotIdentity";
        case ErrorCode::PreconditionViolated: return "PreconditionViolated";
        case ErrorCode::K0NotStable: return "K0NotStable";
        case ErrorCode::K0NotStabilizing: return "K0NotStabilizing";
        case ErrorCode::QUnstable: return "QUnstable";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

}  // namespace clp
