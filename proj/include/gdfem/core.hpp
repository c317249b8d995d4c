// core.hpp -- common aliases and error types shared across the library.
#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace gdfem {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Fourth-order tensor A_iJkL stored as a 9x9 matrix with the column-major
// flattening m = 3*J + i (consistent with Eigen's vec() of a Mat3), so major
// symmetry A_iJkL = A_kLiJ is plain matrix symmetry.
using Tensor4 = Eigen::Matrix<double, 9, 9>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input file could not be parsed; carries the 1-based offending line.
struct FormatError : Error {
  FormatError(const std::string& what, long line)
      : Error(what + " (line " + std::to_string(line) + ")"), line(line) {}
  long line;
};

// A tetrahedron with non-positive volume was encountered while importing.
struct OrientationError : Error {
  OrientationError(const std::string& what, long tet)
      : Error(what + " (tet " + std::to_string(tet) + ")"), tet(tet) {}
  long tet;
};

// det F <= 0 at a material point. Recoverable: the load stepper cuts the step.
struct InvertedStateError : Error {
  using Error::Error;
};

// Boundary facet not covered exactly once by the classification predicates.
struct ClassificationError : Error {
  using Error::Error;
};

// The per-element internal block could not be eliminated.
struct CondensationError : Error {
  using Error::Error;
};

// Newton loop exceeded its iteration cap. Recoverable via step bisection.
struct NonconvergenceError : Error {
  using Error::Error;
};

// Linear solve failed or did not meet the direct-factorization contract.
struct SolverError : Error {
  using Error::Error;
};

// A desk-scale diagnostic was asked to run on a problem above its size gate.
struct SizeLimitError : Error {
  using Error::Error;
};

// Committed Gauss-point history decreased beyond tolerance.
struct IrreversibilityError : Error {
  using Error::Error;
};

}  // namespace gdfem
