#pragma once

namespace nss {

/// Physical and discretization parameters for the compressible
/// fluid / particle system
///
///   d_t rho + div(rho u) = 0
///   d_t(rho u) + div(rho u x u) + grad(p_d(rho) + eta)
///       - mu Lap u - lambda grad(div u) = -(eta + beta rho) grad Phi
///   d_t eta + div(eta (u - grad Phi)) - Lap eta = 0
///
/// with the barotropic law p(rho) = a rho^gamma and the optional artificial
/// stiffening p_d(rho) = p(rho) + delta rho^6 used for continuation runs.
struct PhysParams {
  double a = 1.0;        // pressure coefficient, > 0
  double gamma = 2.0;    // adiabatic exponent, > 1
  double mu = 0.1;       // shear viscosity, > 0
  double lambda = 0.0;   // bulk viscosity, lambda + 2 mu / 3 >= 0
  double beta = 1.0;     // fluid weight in the potential coupling, != 0
  double delta = 0.0;    // artificial pressure strength, >= 0
  double h = 1e-2;       // implicit time step, > 0

  /// Throws std::invalid_argument naming the violated constraint.
  void validate() const;
};

/// p_d(rho) = a rho^gamma + delta rho^6. Requires rho >= 0.
double pressure(double rho, const PhysParams& p);

/// Pressure potential Pi_d(rho) = a/(gamma-1) rho^gamma + delta/5 rho^6,
/// the bulk free-energy density of the barotropic law.
double pressure_potential(double rho, const PhysParams& p);

/// Pi_d'(rho) = a gamma/(gamma-1) rho^(gamma-1) + (6/5) delta rho^5.
/// Satisfies rho * d/drho [Pi_d'] = p_d', so grad p_d = rho grad Pi_d'(rho)
/// for smooth fields, which is what the well-balanced face force uses.
double pressure_potential_prime(double rho, const PhysParams& p);

}  // namespace nss
