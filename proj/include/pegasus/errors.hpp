#pragma once

#include <stdexcept>
#include <string>

namespace pegasus {

// Validation errors: bad user input (configs, CLI args, parameter ranges,
// shape/precondition violations). The CLI maps these to exit code 1.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Runtime errors: I/O failures, malformed data files, solver breakdowns.
// The CLI maps these (and anything unexpected) to exit code 2.
struct RuntimeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidConfig : ValidationError { using ValidationError::ValidationError; };
struct InvalidParams : ValidationError { using ValidationError::ValidationError; };
struct InvalidTarget : ValidationError { using ValidationError::ValidationError; };
struct ShapeMismatch : ValidationError { using ValidationError::ValidationError; };
struct TooFewPoints : ValidationError { using ValidationError::ValidationError; };
struct InsufficientClassMembers : ValidationError { using ValidationError::ValidationError; };
struct DegenerateData : ValidationError { using ValidationError::ValidationError; };
struct MixedDatasets : ValidationError { using ValidationError::ValidationError; };
struct CoverageMismatch : ValidationError { using ValidationError::ValidationError; };
struct IndexOutOfRange : ValidationError { using ValidationError::ValidationError; };

struct IoError : RuntimeError { using RuntimeError::RuntimeError; };
struct BadMagic : RuntimeError { using RuntimeError::RuntimeError; };
struct TruncatedFile : RuntimeError { using RuntimeError::RuntimeError; };
struct DimensionMismatch : RuntimeError { using RuntimeError::RuntimeError; };
struct NonFiniteLoss : RuntimeError { using RuntimeError::RuntimeError; };
struct SingularCovariance : RuntimeError { using RuntimeError::RuntimeError; };
struct SolverDidNotConverge : RuntimeError { using RuntimeError::RuntimeError; };

} // namespace pegasus
