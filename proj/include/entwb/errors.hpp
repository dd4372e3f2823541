#pragma once

#include <stdexcept>

namespace entwb {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NegativeMass : Error { using Error::Error; };
struct MassNotOne : Error { using Error::Error; };
struct OutOfRange : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct NonSummable : Error { using Error::Error; };
struct InvalidWitness : Error { using Error::Error; };
struct TraceMismatch : Error { using Error::Error; };
struct TooLarge : Error { using Error::Error; };
struct NotZeroOnInterval : Error { using Error::Error; };
struct BadParams : Error { using Error::Error; };
struct QuadratureFailure : Error { using Error::Error; };
struct MissingJoint : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct InvalidTable : Error { using Error::Error; };

}  // namespace entwb
