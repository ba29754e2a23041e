#include "beams/errors.hpp"

namespace beams {

const char* to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::ToleranceFailure: return "ToleranceFailure";
    case ErrorKind::NotCrossed: return "NotCrossed";
    case ErrorKind::ConstructionError: return "ConstructionError";
    case ErrorKind::SingularJ: return "SingularJ";
    case ErrorKind::OutsideTube: return "OutsideTube";
    case ErrorKind::StepTooLarge: return "StepTooLarge";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::ZeroEnergy: return "ZeroEnergy";
    case ErrorKind::ParameterError: return "ParameterError";
    case ErrorKind::InadmissibleOrbit: return "InadmissibleOrbit";
    case ErrorKind::DegenerateSpin: return "DegenerateSpin";
    case ErrorKind::ConfigError: return "ConfigError";
    }
    return "UnknownError";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind)
{
}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace beams
