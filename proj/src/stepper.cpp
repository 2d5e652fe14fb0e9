#include "nss/stepper.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nss {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

Eigen::VectorXd solve_checked(const SpMat& A, const Eigen::VectorXd& b,
                              double linear_tol, const char* what) {
  Eigen::SparseLU<SpMat> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    throw SolverError(std::string(what) + ": sparse factorization failed");
  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success)
    throw SolverError(std::string(what) + ": sparse solve failed");
  const double resid = (A * x - b).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  if (!(resid <= linear_tol * scale))
    throw SolverError(std::string(what) + ": residual " +
                      std::to_string(resid) + " above linear_tol");
  return x;
}

// Clamps roundoff-size negative values to zero; anything genuinely negative
// means the M-matrix structure was lost and the step must fail.
void clamp_nonneg(ScalarField& f, const char* what) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  const double tol = 1e-13 * std::max(m, 1e-300);
  for (double& v : f) {
    if (!std::isfinite(v)) throw SolverError(std::string(what) + ": non-finite value");
    if (v < 0.0) {
      if (v < -tol)
        throw SolverError(std::string(what) + ": negative value beyond roundoff");
      v = 0.0;
    }
  }
}

// Implicit particle solve: (eta - eta_prev)/h + div J(eta) = 0 with the
// exponential-fitting flux and donor-cell advection at frozen face
// velocities. The matrix is an M-matrix (positive diagonal, nonpositive
// off-diagonals, row sums 1/h), so eta stays nonnegative.
ScalarField solve_eta_implicit(const Grid& g, const ScalarField& eta_prev,
                               const PotentialField& pot,
                               const FaceArrays& uf, double h,
                               double linear_tol) {
  const int N = g.ncells();
  std::vector<Triplet> trip;
  trip.reserve(static_cast<size_t>(N) * (1 + 2 * g.dim));
  Eigen::VectorXd b(N);
  for (int c = 0; c < N; ++c) {
    trip.emplace_back(c, c, 1.0 / h);
    b[c] = eta_prev[c] / h;
  }
  for (int a = 0; a < g.dim; ++a) {
    const double dx = g.dx[a];
    for (int t = 0; t < g.nrows(a); ++t)
      for (int f = 1; f < g.n[a]; ++f) {
        const int idx = g.face_index(a, f, t);
        const int L = g.face_left_cell(a, f, t);
        const int R = g.face_right_cell(a, f, t);
        const double w = pot.dphi.axis[a][idx] * dx;
        const double ub = uf.axis[a][idx];
        // J = cL eta_L + cR eta_R
        const double cL = bernoulli(w) / dx + std::max(ub, 0.0);
        const double cR = -bernoulli(-w) / dx + std::min(ub, 0.0);
        // d/dt eta_L += -J/dx, d/dt eta_R += +J/dx (divergence), moved left.
        trip.emplace_back(L, L, cL / dx);
        trip.emplace_back(L, R, cR / dx);
        trip.emplace_back(R, L, -cL / dx);
        trip.emplace_back(R, R, -cR / dx);
      }
  }
  SpMat A(N, N);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd x = solve_checked(A, b, linear_tol, "particle solve");
  ScalarField eta(x.data(), x.data() + N);
  clamp_nonneg(eta, "particle solve");
  return eta;
}

// Implicit upwind continuity solve at frozen face velocities; M-matrix, so
// rho stays nonnegative and mass is conserved to solver roundoff.
ScalarField solve_rho_implicit(const Grid& g, const ScalarField& rho_prev,
                               const FaceArrays& uf, double h,
                               double linear_tol) {
  const int N = g.ncells();
  std::vector<Triplet> trip;
  trip.reserve(static_cast<size_t>(N) * (1 + 2 * g.dim));
  Eigen::VectorXd b(N);
  for (int c = 0; c < N; ++c) {
    trip.emplace_back(c, c, 1.0 / h);
    b[c] = rho_prev[c] / h;
  }
  for (int a = 0; a < g.dim; ++a) {
    const double dx = g.dx[a];
    for (int t = 0; t < g.nrows(a); ++t)
      for (int f = 1; f < g.n[a]; ++f) {
        const int L = g.face_left_cell(a, f, t);
        const int R = g.face_right_cell(a, f, t);
        const double ub = uf.axis[a][g.face_index(a, f, t)];
        const double cL = std::max(ub, 0.0);
        const double cR = std::min(ub, 0.0);
        trip.emplace_back(L, L, cL / dx);
        trip.emplace_back(L, R, cR / dx);
        trip.emplace_back(R, L, -cL / dx);
        trip.emplace_back(R, R, -cR / dx);
      }
  }
  SpMat A(N, N);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd x = solve_checked(A, b, linear_tol, "continuity solve");
  ScalarField rho(x.data(), x.data() + N);
  clamp_nonneg(rho, "continuity solve");
  return rho;
}

// Momentum solve with the new density in the mass matrix, convective fluxes
// equal to the continuity mass fluxes times the upwind unknown velocity,
// implicit viscosity, and the well-balanced force on the right-hand side.
VectorField solve_momentum(const Grid& g, const ScalarField& rho_new,
                           const VectorField& mom_prev,
                           const FaceArrays& massflux,
                           const VectorField& force, const PhysParams& p,
                           double linear_tol) {
  const int N = g.ncells();
  const int dim = g.dim;
  const int M = dim * N;
  std::vector<Triplet> trip;
  trip.reserve(static_cast<size_t>(M) * 8);
  Eigen::VectorXd b(M);

  for (int comp = 0; comp < dim; ++comp) {
    const int off = comp * N;
    for (int c = 0; c < N; ++c) {
      trip.emplace_back(off + c, off + c, rho_new[c] / p.h);
      b[off + c] = mom_prev.comp[comp][c] / p.h + force.comp[comp][c];
    }
    // Convection: per axis-a face, flux F * upwind(u_comp).
    for (int a = 0; a < dim; ++a) {
      const double dx = g.dx[a];
      for (int t = 0; t < g.nrows(a); ++t)
        for (int f = 1; f < g.n[a]; ++f) {
          const int idx = g.face_index(a, f, t);
          const int L = g.face_left_cell(a, f, t);
          const int R = g.face_right_cell(a, f, t);
          const double F = massflux.axis[a][idx];
          // sign(F) == sign(ubar) because rho_up >= 0
          const double cL = std::max(F, 0.0);
          const double cR = std::min(F, 0.0);
          trip.emplace_back(off + L, off + L, cL / dx);
          trip.emplace_back(off + L, off + R, cR / dx);
          trip.emplace_back(off + R, off + L, -cL / dx);
          trip.emplace_back(off + R, off + R, -cR / dx);
        }
    }
    // -mu Lap with no-slip walls, moved to the left-hand side.
    for (int a = 0; a < dim; ++a) {
      const double inv2 = p.mu / (g.dx[a] * g.dx[a]);
      for (int t = 0; t < g.nrows(a); ++t) {
        const int na = g.n[a];
        auto cell = [&](int i) {
          return a == 0 ? g.cell_index(i, t) : g.cell_index(t, i);
        };
        for (int i = 0; i < na; ++i) {
          const double cl = (i == 0 ? 2.0 : 1.0);
          const double cr = (i == na - 1 ? 2.0 : 1.0);
          trip.emplace_back(off + cell(i), off + cell(i), (cl + cr) * inv2);
          if (i > 0) trip.emplace_back(off + cell(i), off + cell(i - 1), -inv2);
          if (i < na - 1)
            trip.emplace_back(off + cell(i), off + cell(i + 1), -inv2);
        }
      }
    }
  }

  SpMat A(M, M);
  A.setFromTriplets(trip.begin(), trip.end());

  if (p.lambda != 0.0) {
    // +lambda D^T D (the grad-div term moved to the left-hand side), with D
    // the face-average divergence on no-slip fields.
    std::vector<Triplet> dt;
    for (int a = 0; a < dim; ++a) {
      const double half = 0.5 / g.dx[a];
      for (int t = 0; t < g.nrows(a); ++t)
        for (int f = 1; f < g.n[a]; ++f) {
          const int L = g.face_left_cell(a, f, t);
          const int R = g.face_right_cell(a, f, t);
          // ubar contributes +ubar/dx to div at L and -ubar/dx at R
          dt.emplace_back(L, a * N + L, half);
          dt.emplace_back(L, a * N + R, half);
          dt.emplace_back(R, a * N + L, -half);
          dt.emplace_back(R, a * N + R, -half);
        }
    }
    SpMat D(N, M);
    D.setFromTriplets(dt.begin(), dt.end());
    SpMat DtD = SpMat(D.transpose()) * D;
    A = A + p.lambda * DtD;
  }

  Eigen::VectorXd x = solve_checked(A, b, linear_tol, "momentum solve");
  VectorField u(g);
  for (int comp = 0; comp < dim; ++comp)
    for (int c = 0; c < N; ++c) {
      const double v = x[comp * N + c];
      if (!std::isfinite(v)) throw SolverError("momentum solve: non-finite value");
      u.comp[comp][c] = v;
    }
  return u;
}

double rel_diff(const Grid& g, const ScalarField& a, const ScalarField& b,
                double denom) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s * g.cell_volume()) / denom;
}

double rel_diff(const Grid& g, const VectorField& a, const VectorField& b,
                double denom) {
  double s = 0.0;
  for (int x = 0; x < a.dim; ++x)
    for (size_t i = 0; i < a.comp[x].size(); ++i)
      s += (a.comp[x][i] - b.comp[x][i]) * (a.comp[x][i] - b.comp[x][i]);
  return std::sqrt(s * g.cell_volume()) / denom;
}

}  // namespace

SimState fixed_point_map(const SimState& guess, const SimState& prev,
                         const PotentialField& pot, const PhysParams& p,
                         const StepConfig& cfg,
                         const FaceArrays* force_selector) {
  if (!(p.h > 0.0)) throw std::invalid_argument("fixed_point_map: h must be positive");
  const Grid& g = prev.grid;
  const VectorField uz = velocity(guess);
  const FaceArrays uf = face_velocities(g, uz);

  SimState next;
  next.grid = g;
  next.time = prev.time + p.h;
  next.eta = solve_eta_implicit(g, prev.eta, pot, uf, p.h, cfg.linear_tol);
  next.rho = solve_rho_implicit(g, prev.rho, uf, p.h, cfg.linear_tol);

  // Mass fluxes consistent with the continuity solve just performed.
  const FaceArrays massflux = convective_flux_rho(g, next.rho, uf);
  // Pressure and potential forces at the new density, particle density
  // frozen at the iterate (lagged coefficient). The upwind branch selector
  // inside the force follows the iterate's velocities unless the caller
  // pinned it (see the header note on two-cycles).
  const VectorField force = faces_to_cells(g, pressure_force_faces(
      g, next.rho, guess.eta, pot, p,
      force_selector ? *force_selector : uf));
  const VectorField u =
      solve_momentum(g, next.rho, prev.mom, massflux, force, p,
                     cfg.linear_tol);

  next.mom = VectorField(g);
  for (int a = 0; a < g.dim; ++a)
    for (int c = 0; c < g.ncells(); ++c)
      next.mom.comp[a][c] = next.rho[c] * u.comp[a][c];
  enforce_vacuum(next);
  return next;
}

StepReport implicit_step(SimState& state, const PotentialField& pot,
                         const PhysParams& p, const StepConfig& cfg) {
  p.validate();
  StepReport rep;
  const EnergyBreakdown e_prev = total_energy(state, pot, p);
  rep.energy_before = e_prev.total();

  const double den_rho = std::max(l2_norm(state.grid, state.rho), 1e-300);
  const double den_eta = std::max(l2_norm(state.grid, state.eta), 1e-300);

  SimState it = state;
  // Pinned force selector (see fixed_point_map): engaged only when the
  // residuals stop contracting, the signature of a branch-flip two-cycle.
  FaceArrays pinned_selector;
  bool pinned = false;
  double res_prev = std::numeric_limits<double>::infinity();
  try {
    for (int j = 1; j <= cfg.picard_max; ++j) {
      SimState next =
          fixed_point_map(it, state, pot, p, cfg,
                          pinned ? &pinned_selector : nullptr);
      rep.picard_iters = j;
      rep.res_rho = rel_diff(state.grid, next.rho, it.rho, den_rho);
      rep.res_eta = rel_diff(state.grid, next.eta, it.eta, den_eta);
      // Momentum is measured against max(momentum norm, density norm): when
      // the fluid is (nearly) at rest the momentum norm degenerates to
      // roundoff and a purely relative test would demand accuracy below the
      // floating-point floor of the linear solves. The density norm is the
      // momentum of the same mass moving at unit speed, a fixed reference
      // scale for "the fluid is at rest to working precision".
      const double den_mom =
          std::max({l2_norm(state.grid, state.mom),
                    l2_norm(state.grid, next.mom), den_rho});
      rep.res_mom = rel_diff(state.grid, next.mom, it.mom, den_mom);
      it = std::move(next);
      if (rep.res_rho <= cfg.picard_tol && rep.res_mom <= cfg.picard_tol &&
          rep.res_eta <= cfg.picard_tol) {
        rep.converged = true;
        break;
      }
      // A healthy sweep contracts by a factor well below 1/2. If progress
      // stalls, pin the force selector at the current iterate so the
      // remaining sweeps iterate a continuous map (a two-cycle keeps the
      // residual exactly constant, so this test catches it on its first
      // full period).
      const double res_max =
          std::max({rep.res_rho, rep.res_mom, rep.res_eta});
      if (!pinned && j >= 2 && res_max > 0.5 * res_prev) {
        pinned_selector = face_velocities(state.grid, velocity(it));
        pinned = true;
      }
      res_prev = res_max;
    }
  } catch (const SolverError& err) {
    rep.failure = err.what();
    return rep;
  }
  if (!rep.converged) {
    rep.failure = "Picard iteration did not reach picard_tol within picard_max sweeps";
    return rep;
  }

  const EnergyBreakdown e_new = total_energy(it, pot, p);
  rep.energy_after = e_new.total();
  rep.dissipation_after = dissipation(it, pot, p);
  rep.ineq_residual = rep.energy_before - rep.energy_after -
                      p.h * rep.dissipation_after;
  rep.inequality_ok = rep.ineq_residual >= -cfg.energy_slack;
  if (!rep.inequality_ok) {
    rep.failure = "discrete energy inequality violated beyond energy_slack";
    return rep;
  }
  rep.accepted = true;
  state = std::move(it);
  return rep;
}

RunResult run(const SimState& init, const PotentialField& pot,
              const PhysParams& p, const StepConfig& cfg, double t_end,
              int sample_every, const StepCallback& on_step) {
  p.validate();
  if (!(t_end >= init.time))
    throw std::invalid_argument("run: t_end must not precede the initial time");

  RunResult res;
  res.final_state = init;
  enforce_vacuum(res.final_state);
  res.ledger.rows.push_back(make_ledger_row(res.final_state, pot, p, 0.0));
  res.snapshots.push_back(res.final_state);
  res.snapshot_times.push_back(res.final_state.time);

  PhysParams ph = p;
  while (t_end - res.final_state.time > 1e-9 * ph.h) {
    PhysParams step_params = ph;
    step_params.h = std::min(ph.h, t_end - res.final_state.time);
    const StepReport rep = implicit_step(res.final_state, pot, step_params, cfg);
    if (!rep.accepted) {
      ++res.halvings;
      if (res.halvings > cfg.max_halvings) {
        res.aborted = true;
        res.abort_reason = rep.failure;
        break;
      }
      ph.h *= 0.5;
      continue;
    }
    ++res.steps;
    res.ledger.rows.push_back(
        make_ledger_row(res.final_state, pot, step_params, rep.ineq_residual));
    if (on_step) on_step(res.final_state, rep);
    if (sample_every > 0 && res.steps % sample_every == 0) {
      res.snapshots.push_back(res.final_state);
      res.snapshot_times.push_back(res.final_state.time);
    }
  }
  if (res.snapshot_times.back() != res.final_state.time) {
    res.snapshots.push_back(res.final_state);
    res.snapshot_times.push_back(res.final_state.time);
  }
  return res;
}

double theta_exponent(double gamma) {
  return std::min(2.0 * gamma / 3.0 - 1.0, 0.25);
}

std::vector<DeltaSweepEntry> delta_continuation(
    const SimState& init, const PotentialField& pot, const PhysParams& p,
    const StepConfig& cfg, double t_end, const std::vector<double>& deltas) {
  if (deltas.empty())
    throw std::invalid_argument("delta_continuation: empty schedule");
  for (size_t i = 0; i < deltas.size(); ++i) {
    if (deltas[i] < 0.0)
      throw std::invalid_argument("delta_continuation: delta must be >= 0");
    if (i > 0 && !(deltas[i] < deltas[i - 1]))
      throw std::invalid_argument(
          "delta_continuation: schedule must be strictly decreasing");
  }

  std::vector<DeltaSweepEntry> out;
  for (double d : deltas) {
    PhysParams ph = p;
    ph.delta = d;
    const double power = ph.gamma + theta_exponent(ph.gamma);
    const double vol = init.grid.cell_volume();
    double integral = 0.0;
    double last_time = init.time;
    RunResult r = run(init, pot, ph, cfg, t_end, 0,
                      [&](const SimState& s, const StepReport&) {
                        double sum = 0.0;
                        for (double rv : s.rho) sum += std::pow(rv, power);
                        integral += (s.time - last_time) * sum * vol;
                        last_time = s.time;
                      });
    DeltaSweepEntry e;
    e.delta = d;
    e.ledger = std::move(r.ledger);
    e.final_state = std::move(r.final_state);
    e.rho_power_integral = integral;
    e.aborted = r.aborted;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace nss
