#pragma once

#include <stdexcept>
#include <string>

namespace anibes {

// Base class for every failure condition the library raises on purpose.
// Everything derives from std::runtime_error so callers may catch coarsely.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Matrix is numerically singular (an eigenvalue modulus below ~1e-12).
class SingularMatrix : public Error {
 public:
  using Error::Error;
};

// An operation required an expansive matrix (all |lambda| > 1).
class NotExpansive : public Error {
 public:
  using Error::Error;
};

// The Jordan basis exceeded the conditioning cap, or the decomposition
// failed its reconstruction bound; the input needs a looser tolerance or
// exact preprocessing.
class IllConditionedBasis : public Error {
 public:
  using Error::Error;
};

// nilpotent_log was handed a matrix U with (U - I)^d not numerically zero.
class NotUnipotent : public Error {
 public:
  using Error::Error;
};

// matrix_log_expansive requires a real spectrum with positive eigenvalues.
class NonPositiveSpectrum : public Error {
 public:
  using Error::Error;
};

class ZeroVector : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Covering kinds (homogeneous vs inhomogeneous) do not match.
class KindMismatch : public Error {
 public:
  using Error::Error;
};

// A sampled certification (ellipsoid nesting) failed; retry with a smaller
// delta or more samples.
class CertificationFailed : public Error {
 public:
  using Error::Error;
};

}  // namespace anibes
