#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bslab {

enum class ErrorCode {
    InvalidConfig,
    NonHermitianInput,
    InvalidArgument,
    SingularMatrix,
    NotHermitian,
    NoConvergence,
    CouplingResonanceHit,
    BoundaryZero,
    NewtonStall,
    ContourCrossesPole,
    QuadratureNoConvergence,
    EvaluationAtPole,
    UnstableCount,
    MissingTrajectoryData,
    BudgetExceeded,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library. `operation()` names the public
/// operation that detected it so that callers (and run manifests) can
/// report the origin without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string operation, const std::string& message)
        : std::runtime_error(message), code_(code), operation_(std::move(operation)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& operation() const noexcept { return operation_; }

private:
    ErrorCode code_;
    std::string operation_;
};

[[noreturn]] inline void fail(ErrorCode code, std::string operation, const std::string& message) {
    throw Error(code, std::move(operation), message);
}

}  // namespace bslab
