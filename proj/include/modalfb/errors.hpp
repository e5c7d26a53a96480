#pragma once

#include <stdexcept>
#include <string>

namespace modalfb {

enum class ErrorKind {
    DegenerateDenominator,
    RootNotBracketed,
    NormalizationFailure,
    MultipleEigenvalue,
    Uncontrollable,
    Unobservable,
    TargetCollision,
    DimensionMismatch,
    EigenSolverFailure,
    NotConverged,
    NoneStabilizes,
    Divergent,
    DomainError,
    DivergentAtZero,
    NoPeriodFound,
    WindowTooShort,
    PropagatorFailure,
    InvalidArgument,
    Config,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what);
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace modalfb
