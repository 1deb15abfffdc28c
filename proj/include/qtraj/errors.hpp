#ifndef QTRAJ_ERRORS_HPP
#define QTRAJ_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qtraj {

/// Categories of failure raised by the core modules. The CLI maps
/// ConfigError to exit code 2 and every numerical kind to exit code 3.
enum class ErrorKind {
    Domain,
    InvalidArgument,
    NotConverged,
    DegeneratePair,
    InvalidCoefficients,
    CalibrationFailure,
    SingularDerivative,
    SingularKinematics,
    DegenerateBeat,
    Unavailable,
    Config,
    NotFound,
};

inline const char* to_string(ErrorKind kind)
{
    switch (kind) {
        case ErrorKind::Domain: return "DomainError";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::NotConverged: return "NotConverged";
        case ErrorKind::DegeneratePair: return "DegeneratePair";
        case ErrorKind::InvalidCoefficients: return "InvalidCoefficients";
        case ErrorKind::CalibrationFailure: return "CalibrationFailure";
        case ErrorKind::SingularDerivative: return "SingularDerivative";
        case ErrorKind::SingularKinematics: return "SingularKinematics";
        case ErrorKind::DegenerateBeat: return "DegenerateBeat";
        case ErrorKind::Unavailable: return "Unavailable";
        case ErrorKind::Config: return "ConfigError";
        case ErrorKind::NotFound: return "NotFound";
    }
    return "Error";
}

class Error : public std::runtime_error
{
  public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what)
        , kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

    bool is_config() const noexcept
    {
        return kind_ == ErrorKind::Config || kind_ == ErrorKind::NotFound;
    }

  private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& what)
{
    throw Error(kind, what);
}

} // namespace qtraj

#endif // QTRAJ_ERRORS_HPP
