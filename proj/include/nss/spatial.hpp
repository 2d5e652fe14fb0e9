#pragma once

#include "nss/energy.hpp"
#include "nss/params.hpp"
#include "nss/potential.hpp"
#include "nss/state.hpp"

namespace nss {

/// Bernoulli weight B(z) = z/(e^z - 1) of the exponential-fitting flux,
/// with B(0) = 1 and a series branch near 0 for full accuracy.
double bernoulli(double z);

/// Face-normal velocities: arithmetic average of the adjacent cell
/// components, exactly 0 on boundary faces (no-slip, zero mass flux).
FaceArrays face_velocities(const Grid& g, const VectorField& u);

/// Donor-cell upwind value for a face with the given normal velocity.
inline double upwind(double ubar, double left, double right) {
  if (ubar > 0.0) return left;
  if (ubar < 0.0) return right;
  return 0.5 * (left + right);
}

/// Upwind mass flux F = ubar * rho_upwind per face; 0 on boundary faces.
FaceArrays convective_flux_rho(const Grid& g, const ScalarField& rho,
                               const FaceArrays& ufaces);

/// Particle flux: exponential-fitting drift-diffusion plus donor-cell
/// advection,
///   J = (B(w) eta_L - B(-w) eta_R)/dx + ubar * eta_upwind,
/// with w = dx * dPhi (the potential jump across the face). The
/// drift-diffusion part vanishes identically on eta proportional to
/// e^{-Phi}. Zero on boundary faces (no particle flux through walls).
FaceArrays particle_flux(const Grid& g, const ScalarField& eta,
                         const PotentialField& pot, const FaceArrays& ufaces);

/// Cell divergence of face fluxes: sum over axes of (F_right - F_left)/dx.
ScalarField flux_divergence(const Grid& g, const FaceArrays& fluxes);

/// mu Lap_h u + lambda grad_h div_h u with no-slip walls.
///
/// The Laplacian differences each component across faces with half-cell
/// wall gradients; the grad-div term is assembled as -D^T D u where D is the
/// face-average divergence. Both pieces are symmetric negative-semidefinite
/// bilinear forms, so the viscous work equals
///   -(mu sum_faces g^2 + lambda sum_cells (div u)^2)
/// exactly, which the energy bookkeeping relies on.
VectorField viscous_operator(const Grid& g, const VectorField& u, double mu,
                             double lambda);

/// Face-average divergence D u (cell scalar), zero wall velocities.
ScalarField face_average_divergence(const Grid& g, const VectorField& u);

/// Well-balanced pressure-and-force faces for the momentum equation,
/// discretizing -grad(p_d(rho) + eta) - (eta + beta rho) grad Phi as
///   f = -rho_up * d(Pi_d'(rho) + beta Phi)/dx - eta_up * d(Phi + log eta)/dx
/// per interior face (upwind selection by the face velocity sign, arithmetic
/// mean at ties), zero on boundary faces. Vanishes identically on the
/// sampled stationary profiles.
FaceArrays pressure_force_faces(const Grid& g, const ScalarField& rho,
                                const ScalarField& eta,
                                const PotentialField& pot,
                                const PhysParams& p, const FaceArrays& ufaces);

/// Cell vector field from face values: arithmetic mean of the two adjacent
/// faces per axis (boundary faces hold 0).
VectorField faces_to_cells(const Grid& g, const FaceArrays& f);

/// Instantaneous right-hand sides d/dt (rho, mom, eta) of the spatially
/// discrete system at the given state (explicit evaluation; the stepper
/// solves the same operators implicitly).
struct SemiDiscreteRhs {
  ScalarField rho;
  VectorField mom;
  ScalarField eta;
};

SemiDiscreteRhs assemble_semidiscrete_rhs(const SimState& s,
                                          const PotentialField& pot,
                                          const PhysParams& p);

}  // namespace nss
