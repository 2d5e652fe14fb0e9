#pragma once

#include <vector>

#include "nss/params.hpp"
#include "nss/potential.hpp"
#include "nss/state.hpp"

namespace nss {

/// eta log eta is evaluated as 0 at or below this floor (x log x -> 0).
inline constexpr double kEntropyFloor = 1e-30;

/// x log x with the entropy floor.
double xlogx(double x);

struct Masses {
  double rho = 0.0;
  double eta = 0.0;
};

/// Midpoint-rule masses of both species.
Masses masses(const SimState& s);

/// Components of the free energy
///   E = int [ 1/2 rho |u|^2 + a/(gamma-1) rho^gamma + delta/5 rho^6
///             + eta log eta + (beta rho + eta) Phi ].
/// The delta term rides in the pressure component.
struct EnergyBreakdown {
  double kinetic = 0.0;
  double pressure = 0.0;
  double entropy = 0.0;
  double potential = 0.0;
  double total() const { return kinetic + pressure + entropy + potential; }
};

EnergyBreakdown total_energy(const SimState& s, const PotentialField& pot,
                             const PhysParams& p);

/// Dissipation functional
///   D = int [ mu |grad u|^2 + lambda |div u|^2
///             + |2 grad sqrt(eta) + sqrt(eta) grad Phi|^2 ].
/// Velocity gradients are cell-centered (centered interior, one-sided at
/// walls); vacuum cells contribute 0 to the velocity terms. The eta term uses
/// face-centered differences of sqrt(eta) and face-averaged sqrt(eta) dPhi on
/// interior faces. Always >= 0.
double dissipation(const SimState& s, const PotentialField& pot,
                   const PhysParams& p);

/// Split used by the ledger (velocity part, eta part); sum == dissipation().
struct DissipationSplit {
  double visc = 0.0;
  double eta = 0.0;
  double total() const { return visc + eta; }
};

DissipationSplit dissipation_split(const SimState& s,
                                   const PotentialField& pot,
                                   const PhysParams& p);

/// One accepted step of conservation/energy bookkeeping.
/// ineq_residual = E_prev - E_new - h D_new, which the per-step energy
/// inequality requires to be >= -slack.
struct LedgerRow {
  double time = 0.0;
  double mass_rho = 0.0;
  double mass_eta = 0.0;
  double e_total = 0.0;
  double e_kinetic = 0.0;
  double e_pressure = 0.0;
  double e_entropy = 0.0;
  double e_potential = 0.0;
  double dissipation_visc = 0.0;
  double dissipation_eta = 0.0;
  double ineq_residual = 0.0;
  double dissipation() const { return dissipation_visc + dissipation_eta; }
};

struct EnergyLedger {
  std::vector<LedgerRow> rows;
};

LedgerRow make_ledger_row(const SimState& s, const PotentialField& pot,
                          const PhysParams& p, double ineq_residual);

}  // namespace nss
