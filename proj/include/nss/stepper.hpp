#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nss/energy.hpp"
#include "nss/spatial.hpp"

namespace nss {

/// Thrown when an inner linear solve fails (singular factorization or
/// residual above linear_tol). The step controller turns it into a rejected
/// step; it never escapes run().
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StepConfig {
  double picard_tol = 1e-10;   // relative successive-iterate L2 tolerance
  int picard_max = 60;         // Picard sweep cap; reject when hit
  double linear_tol = 1e-11;   // verified residual bound of the sparse solves
  double energy_slack = 0.0;   // absolute per-step energy inequality slack
  int max_halvings = 10;       // cumulative h halvings per run before abort
};

struct StepReport {
  bool accepted = false;
  bool converged = false;      // Picard contraction reached picard_tol
  bool inequality_ok = false;  // E_new + h D_new <= E_prev + slack
  int picard_iters = 0;
  double res_rho = 0.0;        // final successive-iterate relative diffs
  double res_mom = 0.0;
  double res_eta = 0.0;
  double energy_before = 0.0;
  double energy_after = 0.0;
  double dissipation_after = 0.0;
  double ineq_residual = 0.0;  // E_prev - E_new - h D_new
  std::string failure;         // empty when accepted
};

/// One application of the constructive map T_h behind the implicit step.
///
/// Given the previous time level `prev` and the current iterate `guess`
/// (transport velocity z and frozen particle density zeta), solves in order
///  (a) the particle equation implicitly with transport velocity z
///      (one exact sparse linear solve, M-matrix, keeps eta >= 0),
///  (b) the continuity equation implicitly with upwind fluxes built from z
///      (M-matrix, keeps rho >= 0), then the momentum equation with the
///      convective mass fluxes from (b), viscous terms implicit, and the
///      well-balanced pressure/force evaluated at the new rho and frozen
///      zeta (lagged-coefficient linearization).
/// Fixed points of this map are exact solutions of the fully implicit step.
///
/// `force_selector`, when non-null, replaces the iterate's face velocities
/// as the upwind *selector* inside the force assembly (the branch choice of
/// which cell donates rho and eta to a face). The flux switches elsewhere
/// are multiplied by the velocity and stay continuous as it crosses zero,
/// but this selector is a pure branch choice, and letting it flip with the
/// iterate can lock the Picard iteration into a two-cycle straddling a sign
/// change; implicit_step pins it once such a cycle is detected. Faces where
/// the pinned sign disagrees with the converged velocity carry a residual
/// O(|u_face|) there, i.e. vanishing exactly where the ambiguity lives.
SimState fixed_point_map(const SimState& guess, const SimState& prev,
                         const PotentialField& pot, const PhysParams& p,
                         const StepConfig& cfg,
                         const FaceArrays* force_selector = nullptr);

/// Advances `state` by one implicit step of size p.h via Picard iteration on
/// fixed_point_map. On acceptance the state is replaced and the report
/// carries the energy bookkeeping; on rejection the state is untouched and
/// `failure` names the reason (non-convergence, solver failure, energy
/// inequality violation beyond slack).
StepReport implicit_step(SimState& state, const PotentialField& pot,
                         const PhysParams& p, const StepConfig& cfg);

using StepCallback =
    std::function<void(const SimState& s, const StepReport& rep)>;

struct RunResult {
  SimState final_state;
  EnergyLedger ledger;                // row 0: initial state, then one/step
  std::vector<SimState> snapshots;    // every sample_every-th step + final
  std::vector<double> snapshot_times;
  bool aborted = false;
  std::string abort_reason;
  int halvings = 0;
  int steps = 0;
};

/// Runs from `init` to t_end with automatic step halving on rejection
/// (cumulative cap cfg.max_halvings, then abort with the partial ledger).
/// sample_every <= 0 keeps only initial and final snapshots.
RunResult run(const SimState& init, const PotentialField& pot,
              const PhysParams& p, const StepConfig& cfg, double t_end,
              int sample_every, const StepCallback& on_step = {});

/// Extra integrability exponent of the density under artificial pressure:
/// Theta = min(2 gamma / 3 - 1, 1/4).
double theta_exponent(double gamma);

struct DeltaSweepEntry {
  double delta = 0.0;
  EnergyLedger ledger;
  SimState final_state;
  double rho_power_integral = 0.0;  // space-time integral of rho^(gamma+Theta)
  bool aborted = false;
};

/// Runs the full simulation once per delta in `deltas` (validated strictly
/// decreasing, final value may be 0), always from the same initial state,
/// recording the rho^(gamma+Theta) space-time integral per run.
std::vector<DeltaSweepEntry> delta_continuation(
    const SimState& init, const PotentialField& pot, const PhysParams& p,
    const StepConfig& cfg, double t_end, const std::vector<double>& deltas);

}  // namespace nss
