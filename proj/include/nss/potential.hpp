#pragma once

#include <functional>

#include "nss/grid.hpp"

namespace nss {

/// Confinement potential sampled on a grid.
///
/// phi is normalized so min phi == 0 (the shift is recorded). Face
/// differences along each axis are precomputed for the drift fluxes and the
/// well-balanced forces; boundary faces carry 0 because no flux and no force
/// is evaluated there. The cell-centered gradient and Laplacian estimates are
/// only used by the confinement validator and the weak-form diagnostics.
struct PotentialField {
  Grid grid;
  ScalarField phi;                 // cell values, min == 0
  FaceArrays dphi;                 // (phi_R - phi_L)/dx per interior face
  VectorField grad;                // cell-centered gradient estimate
  ScalarField lap;                 // cell-centered Laplacian estimate
  bool bounded_domain = true;      // false: truncated unbounded confinement
  double normalization_shift = 0;  // constant subtracted to reach min == 0

  static PotentialField from_callable(
      const Grid& g, const std::function<double(double, double)>& f,
      bool bounded);
  static PotentialField from_samples(const Grid& g, ScalarField values,
                                     bool bounded);
};

}  // namespace nss
