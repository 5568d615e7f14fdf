#ifndef OSTTA_ERRORS_HPP
#define OSTTA_ERRORS_HPP

#include <stdexcept>

namespace ostta {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SeparationInfeasible : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct NotNormalized : Error { using Error::Error; };
struct DegenerateScores : Error { using Error::Error; };
struct InvalidThresholds : Error { using Error::Error; };
struct EmptyClass : Error { using Error::Error; };
struct ZeroVector : Error { using Error::Error; };
struct EmptyBank : Error { using Error::Error; };
struct EmptyNegatives : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace ostta

#endif  // OSTTA_ERRORS_HPP
