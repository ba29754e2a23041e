#pragma once

#include <stdexcept>
#include <string>

namespace beams {

enum class ErrorKind {
    DomainError,
    ToleranceFailure,
    NotCrossed,
    ConstructionError,
    SingularJ,
    OutsideTube,
    StepTooLarge,
    QuadratureFailure,
    ZeroEnergy,
    ParameterError,
    InadmissibleOrbit,
    DegenerateSpin,
    ConfigError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace beams
