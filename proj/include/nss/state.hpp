#pragma once

#include "nss/grid.hpp"

namespace nss {

/// Evolved fields at one time level: mass density, momentum density and
/// particle density, all cell-centered.
///
/// Invariants maintained by the stepper: rho >= 0, eta >= 0 everywhere, and
/// mom == 0 on vacuum cells (rho below the vacuum floor).
struct SimState {
  Grid grid;
  ScalarField rho;
  VectorField mom;
  ScalarField eta;
  double time = 0.0;

  static SimState zeros(const Grid& g);
};

/// Vacuum threshold: 1e-12 times the mean density. Cells at or below it are
/// treated as empty when velocities are recovered.
double vacuum_floor(const SimState& s);

/// u = mom/rho where rho is above the vacuum floor, 0 elsewhere.
VectorField velocity(const SimState& s);

/// Zeroes momentum on vacuum cells (state invariant after each solve).
void enforce_vacuum(SimState& s);

}  // namespace nss
