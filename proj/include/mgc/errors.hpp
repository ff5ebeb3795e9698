#pragma once

#include <stdexcept>
#include <string>

namespace mgc {

/// Base class of every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A matrix fails the structural requirements of its type
/// (hat form, symmetry, rotation orthonormality, ...).
struct MalformedElementError : Error {
  using Error::Error;
};

/// A group logarithm was requested outside its injectivity region.
struct InjectivityError : Error {
  using Error::Error;
};

/// A series operator was evaluated outside its convergence region.
struct DivergenceRiskError : Error {
  using Error::Error;
};

/// Input data violates a documented invariant (config fields, gain
/// definiteness, physical consistency of inertial parameters, ...).
struct ValidationError : Error {
  using Error::Error;
};

/// A numerical procedure failed or produced non-finite values.
struct NumericalError : Error {
  using Error::Error;
};

}  // namespace mgc
