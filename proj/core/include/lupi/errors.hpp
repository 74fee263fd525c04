#pragma once

#include <stdexcept>

namespace lupi {

// Base class for every failure this library reports.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct NumericError : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct UnsupportedModeError : Error { using Error::Error; };
struct UndefinedMetricError : Error { using Error::Error; };

} // namespace lupi
