#include "modalfb/errors.hpp"

namespace modalfb {

const char* to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorKind::RootNotBracketed: return "RootNotBracketed";
    case ErrorKind::NormalizationFailure: return "NormalizationFailure";
    case ErrorKind::MultipleEigenvalue: return "MultipleEigenvalue";
    case ErrorKind::Uncontrollable: return "Uncontrollable";
    case ErrorKind::Unobservable: return "Unobservable";
    case ErrorKind::TargetCollision: return "TargetCollision";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EigenSolverFailure: return "EigenSolverFailure";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::NoneStabilizes: return "NoneStabilizes";
    case ErrorKind::Divergent: return "Divergent";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::DivergentAtZero: return "DivergentAtZero";
    case ErrorKind::NoPeriodFound: return "NoPeriodFound";
    case ErrorKind::WindowTooShort: return "WindowTooShort";
    case ErrorKind::PropagatorFailure: return "PropagatorFailure";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Config: return "Config";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
{
}

}  // namespace modalfb
