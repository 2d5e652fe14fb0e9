#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "nss/params.hpp"
#include "nss/potential.hpp"

namespace nss {

/// Thrown when the bisection bracket cannot be established or the root
/// iteration fails; the CLI maps it to its own exit code.
struct RootFindError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Steady state of the coupled system:
///   rho_s = ((gamma-1)/(a gamma) * max(C_rho - beta Phi, 0))^(1/(gamma-1))
///   eta_s = C_eta e^{-Phi}
/// with the constants fixed by the prescribed masses. C_rho and C_eta refer
/// to the potential as given to PotentialField::build, before its internal
/// min-normalization; the profiles are identical either way.
struct StationaryState {
  ScalarField rho_s;
  ScalarField eta_s;
  double C_rho = 0.0;
  double C_eta = 0.0;
  double mass_rho = 0.0;   // quadrature masses of the returned profiles
  double mass_eta = 0.0;
  int bisect_iters = 0;
  double mass_residual = 0.0;  // |mass(rho_s) - target| / target
};

/// eta_s = C_eta e^{-Phi} with C_eta = mass_eta / int e^{-Phi}.
/// Throws std::invalid_argument unless mass_eta > 0.
ScalarField solve_eta_s(const Grid& g, const PotentialField& pot,
                        double mass_eta, double* C_eta_out = nullptr);

/// Bisection for C_rho so the quadrature mass of rho_s matches mass_rho to
/// 1e-10 relative; bracket [min beta Phi, +expansion]. Requires mass_rho > 0.
ScalarField solve_rho_s(const Grid& g, const PotentialField& pot,
                        const PhysParams& p, double mass_rho,
                        double* C_rho_out = nullptr, int* iters_out = nullptr,
                        double* mass_residual_out = nullptr);

/// Requires mass_rho > 0; mass_eta may be zero, which yields the zero
/// particle profile with C_eta = 0.
StationaryState solve_stationary(const Grid& g, const PotentialField& pot,
                                 const PhysParams& p, double mass_rho,
                                 double mass_eta);

/// Finite-difference residual norms of the stationary balance:
///   rho_max:      max |d p(rho_s)/dx + beta avg(rho_s) dPhi/dx| over
///                 interior faces with both cells out of vacuum
///   eta_fd_max:   max |d eta_s/dx + avg(eta_s) dPhi/dx|
///   eta_flux_max: max |exponential-fitting flux of eta_s| (0 to roundoff)
struct StationaryResidual {
  double rho_max = 0.0;
  double eta_fd_max = 0.0;
  double eta_flux_max = 0.0;
};

StationaryResidual stationary_residual(const Grid& g,
                                       const PotentialField& pot,
                                       const PhysParams& p,
                                       const ScalarField& rho_s,
                                       const ScalarField& eta_s);

/// Checks of the confinement hypotheses on a sampled potential.
///
/// Bounded domains: sub-level connectivity over a 16-threshold ladder plus
/// finiteness/normalization. Truncated unbounded domains additionally
/// require beta > 0, integrable tail of e^{-Phi/2} (outer 10% radial shell
/// holds < 5% of the integral) and finite growth fits
/// |Lap Phi| <= c1 |grad Phi| and c1 |grad Phi| <= c2 Phi outside half the
/// domain radius.
struct ConfinementReport {
  bool pass = false;
  bool bounded = true;
  bool finite_ok = true;
  bool connectivity_ok = true;
  double worst_threshold = 0.0;  // first threshold with > 1 component
  int worst_components = 1;
  bool beta_ok = true;           // unbounded only
  bool tail_ok = true;           // unbounded only
  double tail_fraction = 0.0;
  bool growth_ok = true;         // unbounded only
  double c1 = 0.0;
  double c2 = 0.0;
  double growth_radius = 0.0;
  std::vector<std::string> failures;
  std::string summary() const;
};

ConfinementReport validate_confinement(const PotentialField& pot,
                                       double beta);

}  // namespace nss
