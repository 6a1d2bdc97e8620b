#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "denjoy/real.hpp"

namespace denjoy {
inline namespace DENJOY_BACKEND_NS {

enum class ErrorKind {
    InvalidArgument,
    PrecisionBudgetExceeded,
    InvalidGeometry,
    InfeasibleDerivatives,
    NotHomeomorphism,
    NotClassP,
    NotBracketed,
    TolUnreachable,
    BreakCollision,
    RefinementViolation,
    DegenerateQuadruple,
    BreakNotInStatedInterval,
    OrderViolation,
    IndexMismatch,
    RankTooShallow,
    HypothesisNotCertified,
    BracketingTooCoarse,
    InvariantViolation,
    ConfigError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the toolkit carries a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

    ErrorKind kind() const noexcept { return kind_; }
    // message without the kind prefix
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace DENJOY_BACKEND_NS
}  // namespace denjoy
