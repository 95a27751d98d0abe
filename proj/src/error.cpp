#include "bslab/error.hpp"

namespace bslab {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::NonHermitianInput: return "NonHermitianInput";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::SingularMatrix: return "SingularMatrix";
        case ErrorCode::NotHermitian: return "NotHermitian";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::CouplingResonanceHit: return "CouplingResonanceHit";
        case ErrorCode::BoundaryZero: return "BoundaryZero";
        case ErrorCode::NewtonStall: return "NewtonStall";
        case ErrorCode::ContourCrossesPole: return "ContourCrossesPole";
        case ErrorCode::QuadratureNoConvergence: return "QuadratureNoConvergence";
        case ErrorCode::EvaluationAtPole: return "EvaluationAtPole";
        case ErrorCode::UnstableCount: return "UnstableCount";
        case ErrorCode::MissingTrajectoryData: return "MissingTrajectoryData";
        case ErrorCode::BudgetExceeded: return "BudgetExceeded";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace bslab
