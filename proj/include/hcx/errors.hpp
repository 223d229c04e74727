#pragma once

#include <stdexcept>
#include <string>

namespace hcx {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Geometry / meshing
struct InclusionOverlap : Error { using Error::Error; };
struct DegenerateGeometry : Error { using Error::Error; };
struct InvalidTopology : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };

// Linear algebra / solves
struct SolverDiverged : Error { using Error::Error; };
struct MissingBoundaryData : Error { using Error::Error; };
struct IncompatibleData : Error { using Error::Error; };
struct NotSPD : Error { using Error::Error; };
struct MeshMismatch : Error { using Error::Error; };

// Configuration / orchestration
struct ConfigError : Error { using Error::Error; };
struct NotImplemented : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

} // namespace hcx
