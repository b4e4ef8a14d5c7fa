#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace clp {

enum class ErrorCode {
    DimensionMismatch,
    NonFinite,
    InvalidArgument,
    NonInvertibleFeedthrough,
    UnstableSystem,
    PlantNotStrictlyProper,
    PlantUnstable,
    NotStateFeedback,
    HorizonTooShort,
    UnsupportedDirection,
    Infeasible,
    Y0NotIdentity,
    R1NotIdentity,
    PreconditionViolated,
    K0NotStable,
    K0NotStabilizing,
    QUnstable,
    ParseError,
};

[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& detail) {
    if (!condition) throw Error(code, detail);
}

}  // namespace clp
