#pragma once

#include <stdexcept>
#include <string>

namespace histreg {

// Base class for all library errors. Input/validation problems derive from
// Error directly; numerical-solver failures derive from SolverError so the
// CLI can map them to a distinct exit code.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverError : Error {
  using Error::Error;
};

// histcore
struct NonOrderedBins : Error { using Error::Error; };
struct NegativeWeight : Error { using Error::Error; };
struct WeightSumNotOne : Error { using Error::Error; };
struct UnboundedBin : Error { using Error::Error; };
struct AllWeightsZero : Error { using Error::Error; };
struct OutOfDomain : Error { using Error::Error; };
struct NotMonotone : Error { using Error::Error; };

// shared
struct LengthMismatch : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct InvalidArgument : Error { using Error::Error; };

// nnqp
struct MaxIterationsExceeded : SolverError { using SolverError::SolverError; };
struct NotPSD : SolverError { using SolverError::SolverError; };

// dsd
struct EmptyTable : Error { using Error::Error; };
struct DegenerateResponse : Error { using Error::Error; };
struct ArityMismatch : Error { using Error::Error; };
struct NegativeSlopeUnsupported : Error { using Error::Error; };

// io
struct ParseError : Error { using Error::Error; };

}  // namespace histreg
