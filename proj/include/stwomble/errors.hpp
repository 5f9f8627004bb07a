#pragma once

#include <stdexcept>
#include <string>

namespace stw {

// Base for every library error. exit_code() is what the CLI returns for it.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
    virtual int exit_code() const { return 1; }
};

struct NumericalError : Error {
    using Error::Error;
    int exit_code() const override { return 3; }
};
struct CholeskyFailure : NumericalError { using NumericalError::NumericalError; };
struct NonFiniteLikelihood : NumericalError { using NumericalError::NumericalError; };
struct QuadratureNonConvergence : NumericalError { using NumericalError::NumericalError; };

struct InadmissibleDerivative : Error { using Error::Error; };
struct Unsupported : Error { using Error::Error; };
struct NonUnitNormal : Error { using Error::Error; };

struct GeometryError : Error { using Error::Error; };
struct MismatchedVertexCounts : GeometryError { using GeometryError::GeometryError; };
struct NonIncreasingTimes : GeometryError { using GeometryError::GeometryError; };
struct DegenerateEdge : GeometryError { using GeometryError::GeometryError; };
struct DegenerateCurve : GeometryError { using GeometryError::GeometryError; };
struct EmptyContour : GeometryError { using GeometryError::GeometryError; };

struct TooFewDraws : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };
struct MidpointMismatch : Error { using Error::Error; };
struct DuplicateCoordinate : Error {
    using Error::Error;
    int exit_code() const override { return 4; }
};

struct ConfigError : Error {
    using Error::Error;
    int exit_code() const override { return 2; }
};
struct MissingArtifact : ConfigError { using ConfigError::ConfigError; };

struct ParseError : Error {
    ParseError(int line, int column, const std::string& what)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
          line(line), column(column) {}
    int exit_code() const override { return 4; }
    int line;
    int column;
};

}  // namespace stw
