#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nss/energy.hpp"
#include "nss/stationary.hpp"
#include "nss/stepper.hpp"

namespace nss {

/// Post-hoc audit of an energy ledger against the per-step inequality
/// E_k + h_k D_k <= E_{k-1} + slack, the decay E_k <= E_0 + k slack, and the
/// cumulative dissipation budget sum h_k D_k <= E_0 - E_final + K slack.
struct AuditResult {
  bool pass = false;
  double worst_step_margin = 0.0;  // min over steps of ineq_residual + slack
  int worst_step = -1;
  double decay_margin = 0.0;       // min over k of E_0 + k slack - E_k
  double cumulative_margin = 0.0;
  std::string detail;
};

AuditResult energy_inequality_audit(const EnergyLedger& ledger, double slack);

/// The two entropy estimates used by the compactness argument, evaluated on
/// one state:
///   (1) int eta log_- eta <= 1/2 int Phi eta + (1/e) int e^{-Phi/2}
///   (2) int eta log eta + int Phi eta >= M_eta log(M_eta / int e^{-Phi})
/// Both hold exactly for the midpoint quadrature (finite Jensen), so the
/// margins should never dip below roundoff.
struct EntropyBounds {
  double neglog_lhs = 0.0;
  double neglog_rhs = 0.0;
  double gibbs_lhs = 0.0;
  double gibbs_rhs = 0.0;
  double margin_neglog = 0.0;  // rhs - lhs
  double margin_gibbs = 0.0;   // lhs - rhs
  bool ok = false;
};

EntropyBounds entropy_bounds_check(const SimState& s,
                                   const PotentialField& pot);

/// Smooth compactly supported space-time test function: tensor product of
/// C-infinity bumps in t and each coordinate, support strictly inside the
/// open space-time cylinder it was built for.
struct TestFunction {
  int dim = 1;
  double t_center = 0.0, t_width = 1.0;
  std::array<double, 2> x_center{0.0, 0.0};
  std::array<double, 2> x_width{1.0, 1.0};

  double value(double t, const std::array<double, 2>& x) const;
  double dt(double t, const std::array<double, 2>& x) const;
  double dx(int axis, double t, const std::array<double, 2>& x) const;
  double dxx(int axis, double t, const std::array<double, 2>& x) const;
};

/// Seeded bank of `count` test functions with randomized centers and widths,
/// supports inside (t0,t1) x interior(grid).
std::vector<TestFunction> make_test_bank(const Grid& g, double t0, double t1,
                                         int count, std::uint64_t seed);

/// Weak-form defects of a discrete trajectory (piecewise-constant-in-time
/// extension) against the continuum integral identities, one value per test
/// function:
///   continuity:  int int rho dt(phi) + rho u . grad(phi)
///   momentum:    int int m . dt(v) + (m x u) : grad v + (p_d + eta) div v
///                - mu grad u : grad v - lambda div u div v
///                - (eta + beta rho) grad Phi . v     (v = phi e_axis)
///   particles:   int int eta dt(phi) + eta (u - grad Phi) . grad(phi)
///                + eta lap(phi)
/// The diffusion term rides on the analytic Laplacian of the test function,
/// so a trajectory sitting on the exact stationary profile leaves only the
/// quadrature error of smooth compactly supported integrands (far below any
/// mesh power). Time integration is exact for the piecewise-constant
/// extension: the dt(phi) pairing telescopes analytically and the flux
/// terms use two-point Gauss nodes per interval for the test-function
/// factor, so the evaluator adds no first-order time error of its own.
/// Requires at least three states; for the scheme the defects shrink at
/// first order under joint (h, dx) refinement.
struct WeakFormResiduals {
  std::vector<double> continuity;
  std::vector<double> momentum;  // bank-major, axis-minor
  std::vector<double> particles;
  double max_abs() const;
};

WeakFormResiduals weak_form_residuals(const std::vector<SimState>& traj,
                                      const std::vector<double>& times,
                                      const PotentialField& pot,
                                      const PhysParams& p,
                                      const std::vector<TestFunction>& bank);

/// Long-time metrics of a trajectory against its stationary state:
/// L^gamma distance of rho, sup of remaining kinetic energy, L1/L2 distances
/// of eta, and the dissipation integral over sliding windows [t-1, t+2].
struct AsymptoticsThresholds {
  double dist_rel = 1e-3;   // relative to the stationary norms
  double kinetic_abs = 1e-6;
};

struct AsymptoticsReport {
  std::vector<double> time;
  std::vector<double> dist_rho_lgamma;
  std::vector<double> kinetic_sup;     // sup over remaining samples
  std::vector<double> dist_eta_l1;
  std::vector<double> dist_eta_l2;
  std::vector<double> window_dissipation;
  double norm_rho_lgamma = 0.0;        // stationary norms used for relative
  double norm_eta_l1 = 0.0;            // thresholds
  double norm_eta_l2 = 0.0;
  bool converged_rho = false;
  bool converged_eta = false;
  bool converged_kinetic = false;
  bool trend_ok = false;  // negative median trend of each decaying metric
  bool converged() const {
    return converged_rho && converged_eta && converged_kinetic;
  }
};

/// Requires the snapshot masses to match the stationary masses to 1e-8
/// relative (throws std::invalid_argument otherwise).
AsymptoticsReport asymptotics(const RunResult& result,
                              const StationaryState& st, const PhysParams& p,
                              const AsymptoticsThresholds& thr = {});

}  // namespace nss
