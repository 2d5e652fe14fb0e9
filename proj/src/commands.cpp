#include "nss/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "nss/diagnostics.hpp"
#include "nss/spatial.hpp"
#include "nss/stationary.hpp"
#include "nss/stepper.hpp"

namespace fs = std::filesystem;

namespace nss {

namespace {

Grid build_grid(const RunConfig& c) {
  if (c.grid.dim == 1) return Grid::line(c.grid.x_lo, c.grid.x_hi, c.grid.nx);
  return Grid::box(c.grid.x_lo, c.grid.x_hi, c.grid.nx, c.grid.y_lo,
                   c.grid.y_hi, c.grid.ny);
}

ScalarField read_all_numbers(const std::string& path, size_t expected,
                             const char* what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open " + what + " file");
  ScalarField vals;
  std::string tok;
  while (in >> tok) {
    for (char& ch : tok)
      if (ch == ',') ch = ' ';
    std::istringstream ts(tok);
    double v;
    while (ts >> v) vals.push_back(v);
    if (!ts.eof())
      throw ConfigError(path + ": malformed number '" + tok + "'");
  }
  if (vals.size() != expected)
    throw ConfigError(path + ": expected " + std::to_string(expected) +
                      " values, found " + std::to_string(vals.size()));
  return vals;
}

// Smooth multiplicative perturbation: three low sine modes per axis with
// seeded coefficients, normalized to unit sup norm.
ScalarField smooth_modes(const Grid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::array<std::array<double, 3>, 2> cm{};
  for (int a = 0; a < g.dim; ++a)
    for (int m = 0; m < 3; ++m) cm[a][m] = coef(rng);

  ScalarField s(g.ncells(), 0.0);
  double smax = 0.0;
  for (int c = 0; c < g.ncells(); ++c) {
    const auto x = g.cell_center(c);
    double v = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      const double xi = (x[a] - g.lo[a]) / (g.hi[a] - g.lo[a]);
      for (int m = 0; m < 3; ++m)
        v += cm[a][m] * std::sin((m + 1) * M_PI * xi);
    }
    s[c] = v;
    smax = std::max(smax, std::abs(v));
  }
  if (smax > 0.0)
    for (double& v : s) v /= smax;
  return s;
}

void box_filter(const Grid& g, ScalarField& f) {
  for (int a = 0; a < g.dim; ++a) {
    ScalarField out(f.size(), 0.0);
    for (int t = 0; t < g.nrows(a); ++t) {
      const int na = g.n[a];
      auto cell = [&](int i) {
        return a == 0 ? g.cell_index(i, t) : g.cell_index(t, i);
      };
      for (int i = 0; i < na; ++i) {
        if (i == 0)
          out[cell(i)] = 0.5 * (f[cell(0)] + f[cell(1)]);
        else if (i == na - 1)
          out[cell(i)] = 0.5 * (f[cell(na - 2)] + f[cell(na - 1)]);
        else
          out[cell(i)] =
              (f[cell(i - 1)] + f[cell(i)] + f[cell(i + 1)]) / 3.0;
      }
    }
    f = std::move(out);
  }
}

void rescale_mass(const Grid& g, ScalarField& f, double target) {
  double m = 0.0;
  for (double v : f) m += v;
  m *= g.cell_volume();
  if (target > 0.0 && m > 0.0) {
    const double r = target / m;
    for (double& v : f) v *= r;
  }
}

fs::path ensure_out_dir(const RunConfig& c) {
  const fs::path out(c.run.out_dir);
  std::error_code ec;
  if (fs::exists(out)) {
    if (!fs::is_directory(out))
      throw ConfigError("run.out_dir = " + c.run.out_dir +
                        " exists and is not a directory");
    return out;
  }
  if (!fs::create_directory(out, ec))
    throw ConfigError("run.out_dir = " + c.run.out_dir +
                      " cannot be created (missing parent?): " + ec.message());
  return out;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw ConfigError(p.string() + ": cannot open for writing");
  f << std::setprecision(17);
  return f;
}

void write_echo(const RunConfig& c, const fs::path& out) {
  auto f = open_out(out / "config_echo.txt");
  f << echo_config(c);
}

void write_ledger(const EnergyLedger& ledger, const fs::path& path) {
  auto f = open_out(path);
  f << "time,mass_rho,mass_eta,E_total,E_kinetic,E_pressure,E_entropy,"
       "E_potential,dissipation,ineq_margin\n";
  for (const auto& r : ledger.rows)
    f << r.time << ',' << r.mass_rho << ',' << r.mass_eta << ',' << r.e_total
      << ',' << r.e_kinetic << ',' << r.e_pressure << ',' << r.e_entropy
      << ',' << r.e_potential << ',' << r.dissipation() << ','
      << r.ineq_residual << "\n";
}

void write_fields(const Grid& g, const SimState& s, const fs::path& path) {
  auto f = open_out(path);
  const VectorField u = velocity(s);
  f << "# time = " << s.time << "\n";
  if (g.dim == 1)
    f << "x,rho,u_x,eta\n";
  else
    f << "x,y,rho,u_x,u_y,eta\n";
  for (int c = 0; c < g.ncells(); ++c) {
    const auto x = g.cell_center(c);
    f << x[0];
    if (g.dim == 2) f << ',' << x[1];
    f << ',' << s.rho[c] << ',' << u.comp[0][c];
    if (g.dim == 2) f << ',' << u.comp[1][c];
    f << ',' << s.eta[c] << "\n";
  }
}

StepConfig step_config(const RunConfig& c, double e0) {
  StepConfig cfg;
  cfg.picard_tol = c.tol.picard_tol;
  cfg.picard_max = c.tol.picard_max;
  cfg.linear_tol = c.tol.linear_tol;
  cfg.energy_slack = c.tol.energy_slack_rel * std::abs(e0);
  return cfg;
}

}  // namespace

Grid make_grid(const RunConfig& c) { return build_grid(c); }

PotentialField make_potential(const RunConfig& c, const Grid& g) {
  const PotentialSpec& ps = c.potential;
  switch (ps.kind) {
    case PotentialKind::linear: {
      const int last = g.dim - 1;
      const double lo = g.lo[last];
      const double gc = ps.g;
      return PotentialField::from_callable(
          g,
          [last, lo, gc](double x, double y) {
            return gc * ((last == 0 ? x : y) - lo);
          },
          ps.bounded);
    }
    case PotentialKind::quadratic: {
      const double k = ps.k, ctr = ps.center;
      const int dim = g.dim;
      return PotentialField::from_callable(
          g,
          [k, ctr, dim](double x, double y) {
            const double rx = x - ctr;
            const double ry = dim == 2 ? y - ctr : 0.0;
            return 0.5 * k * (rx * rx + ry * ry);
          },
          ps.bounded);
    }
    case PotentialKind::double_well: {
      const double sc = ps.scale;
      const int last = g.dim - 1;
      return PotentialField::from_callable(
          g,
          [sc, last](double x, double y) {
            const double w = last == 0 ? x : y;
            const double q = w * w - 1.0;
            return sc * q * q;
          },
          ps.bounded);
    }
    case PotentialKind::tabulated: {
      ScalarField vals = read_all_numbers(
          ps.file, static_cast<size_t>(g.ncells()), "potential");
      return PotentialField::from_samples(g, std::move(vals), ps.bounded);
    }
  }
  throw ConfigError("unreachable potential kind");
}

SimState make_initial_state(const RunConfig& c, const Grid& g,
                            const PotentialField& pot) {
  SimState s = SimState::zeros(g);
  const InitialSpec& is = c.initial;
  switch (is.kind) {
    case InitialKind::uniform:
      for (int i = 0; i < g.ncells(); ++i) {
        s.rho[i] = is.rho0;
        s.eta[i] = is.eta0;
      }
      break;
    case InitialKind::equilibrium:
    case InitialKind::perturbed_equilibrium: {
      const StationaryState st =
          solve_stationary(g, pot, c.params, is.mass_rho, is.mass_eta);
      s.rho = st.rho_s;
      s.eta = st.eta_s;
      if (is.kind == InitialKind::perturbed_equilibrium) {
        std::mt19937_64 rng(is.seed);
        const ScalarField sr = smooth_modes(g, rng);
        const ScalarField se = smooth_modes(g, rng);
        for (int i = 0; i < g.ncells(); ++i) {
          s.rho[i] *= 1.0 + is.amplitude * sr[i];
          s.eta[i] *= 1.0 + is.amplitude * se[i];
        }
        if (is.mollify) {
          box_filter(g, s.rho);
          box_filter(g, s.eta);
        }
        rescale_mass(g, s.rho, is.mass_rho);
        rescale_mass(g, s.eta, is.mass_eta);
      }
      break;
    }
    case InitialKind::tabulated: {
      const int per_cell = g.dim + 2;
      ScalarField vals = read_all_numbers(
          is.file, static_cast<size_t>(g.ncells()) * per_cell, "initial data");
      for (int i = 0; i < g.ncells(); ++i) {
        s.rho[i] = vals[i * per_cell];
        s.mom.comp[0][i] = s.rho[i] * vals[i * per_cell + 1];
        if (g.dim == 2) s.mom.comp[1][i] = s.rho[i] * vals[i * per_cell + 2];
        s.eta[i] = vals[i * per_cell + per_cell - 1];
      }
      for (int i = 0; i < g.ncells(); ++i)
        if (s.rho[i] < 0.0 || s.eta[i] < 0.0)
          throw ConfigError(is.file +
                            ": initial densities must be nonnegative");
      break;
    }
  }
  return s;
}

int cmd_simulate(const RunConfig& c, std::ostream& log, bool quiet) {
  try {
    const Grid g = make_grid(c);
    const PotentialField pot = make_potential(c, g);
    const SimState init = make_initial_state(c, g, pot);
    const fs::path out = ensure_out_dir(c);
    write_echo(c, out);

    const double e0 = total_energy(init, pot, c.params).total();
    const StepConfig cfg = step_config(c, e0);
    if (!quiet)
      log << "simulate: " << g.ncells() << " cells, h = " << c.params.h
          << ", t_end = " << c.run.t_end << ", E(0) = " << e0 << "\n";

    int counter = 0;
    const RunResult res =
        run(init, pot, c.params, cfg, c.run.t_end, c.run.sample_every,
            [&](const SimState& s, const StepReport& rep) {
              ++counter;
              if (!quiet && counter % 500 == 0)
                log << "  t = " << s.time << "  E = " << rep.energy_after
                    << "  D = " << rep.dissipation_after << "\n";
            });

    write_ledger(res.ledger, out / "ledger.csv");
    for (size_t k = 0; k < res.snapshots.size(); ++k)
      write_fields(g, res.snapshots[k],
                   out / ("fields_" + std::to_string(k) + ".csv"));

    const AuditResult audit =
        energy_inequality_audit(res.ledger, cfg.energy_slack);
    {
      auto f = open_out(out / "audit.txt");
      f << audit.detail;
      if (res.aborted)
        f << "aborted after " << res.steps << " steps: " << res.abort_reason
          << "\n";
    }

    if (res.aborted) {
      log << "simulate: aborted after " << res.steps
          << " steps: " << res.abort_reason << "\n";
      return kExitStepper;
    }
    if (!audit.pass) {
      log << "simulate: energy audit failed\n" << audit.detail;
      return kExitStepper;
    }
    if (!quiet)
      log << "simulate: " << res.steps << " steps, " << res.halvings
          << " halvings, final E = " << res.ledger.rows.back().e_total
          << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const RootFindError& e) {
    log << "error: " << e.what() << "\n";
    return kExitRootFind;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitStepper;
  }
}

int cmd_stationary(const RunConfig& c, std::ostream& log, bool quiet) {
  try {
    const Grid g = make_grid(c);
    const PotentialField pot = make_potential(c, g);
    const SimState init = make_initial_state(c, g, pot);
    const Masses m = masses(init);
    if (!(m.rho > 0.0))
      throw ConfigError("stationary: initial data carries no fluid mass");
    const fs::path out = ensure_out_dir(c);
    write_echo(c, out);

    const StationaryState st = solve_stationary(g, pot, c.params, m.rho, m.eta);
    const StationaryResidual res =
        stationary_residual(g, pot, c.params, st.rho_s, st.eta_s);

    {
      auto f = open_out(out / "stationary.csv");
      f << (g.dim == 1 ? "x,rho_s,eta_s\n" : "x,y,rho_s,eta_s\n");
      for (int i = 0; i < g.ncells(); ++i) {
        const auto x = g.cell_center(i);
        f << x[0];
        if (g.dim == 2) f << ',' << x[1];
        f << ',' << st.rho_s[i] << ',' << st.eta_s[i] << "\n";
      }
    }
    {
      auto f = open_out(out / "stationary_report.txt");
      f << std::setprecision(17);
      f << "C_rho = " << st.C_rho << "\n";
      f << "C_eta = " << st.C_eta << "\n";
      f << "mass_rho = " << st.mass_rho << "\n";
      f << "mass_eta = " << st.mass_eta << "\n";
      f << "bisect_iters = " << st.bisect_iters << "\n";
      f << "mass_residual = " << st.mass_residual << "\n";
      f << "residual_rho_max = " << res.rho_max << "\n";
      f << "residual_eta_fd_max = " << res.eta_fd_max << "\n";
      f << "residual_eta_flux_max = " << res.eta_flux_max << "\n";
    }
    if (!quiet)
      log << "stationary: C_rho = " << st.C_rho << ", C_eta = " << st.C_eta
          << ", flux residual = " << res.eta_flux_max << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const RootFindError& e) {
    log << "error: " << e.what() << "\n";
    return kExitRootFind;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitStepper;
  }
}

int cmd_validate_potential(const RunConfig& c, std::ostream& log, bool quiet) {
  try {
    const Grid g = make_grid(c);
    const PotentialField pot = make_potential(c, g);
    const ConfinementReport rep = validate_confinement(pot, c.params.beta);
    const fs::path out = ensure_out_dir(c);
    write_echo(c, out);
    {
      auto f = open_out(out / "confinement_report.txt");
      f << rep.summary();
    }
    if (!quiet) log << rep.summary();
    return rep.pass ? kExitOk : kExitConfinement;
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitStepper;
  }
}

int cmd_asymptotics(const RunConfig& c, std::ostream& log, bool quiet) {
  try {
    const Grid g = make_grid(c);
    const PotentialField pot = make_potential(c, g);
    const SimState init = make_initial_state(c, g, pot);
    const Masses m = masses(init);
    if (!(m.rho > 0.0))
      throw ConfigError("asymptotics: initial data carries no fluid mass");
    const fs::path out = ensure_out_dir(c);
    write_echo(c, out);

    const StationaryState st = solve_stationary(g, pot, c.params, m.rho, m.eta);
    const double e0 = total_energy(init, pot, c.params).total();
    const StepConfig cfg = step_config(c, e0);
    const RunResult res =
        run(init, pot, c.params, cfg, c.run.t_end, c.run.sample_every);
    write_ledger(res.ledger, out / "ledger.csv");
    if (res.aborted) {
      log << "asymptotics: run aborted: " << res.abort_reason << "\n";
      return kExitStepper;
    }

    AsymptoticsThresholds thr;
    thr.dist_rel = c.tol.asym_dist_rel;
    thr.kinetic_abs = c.tol.asym_kinetic_abs;
    const AsymptoticsReport rep = asymptotics(res, st, c.params, thr);

    {
      auto f = open_out(out / "asymptotics.csv");
      f << "time,dist_rho_Lgamma,kinetic_sup,dist_eta_L1,dist_eta_L2\n";
      for (size_t k = 0; k < rep.time.size(); ++k)
        f << rep.time[k] << ',' << rep.dist_rho_lgamma[k] << ','
          << rep.kinetic_sup[k] << ',' << rep.dist_eta_l1[k] << ','
          << rep.dist_eta_l2[k] << "\n";
    }
    {
      auto f = open_out(out / "dissipation_windows.csv");
      f << "time,window_dissipation\n";
      for (size_t k = 0; k < rep.time.size(); ++k)
        f << rep.time[k] << ',' << rep.window_dissipation[k] << "\n";
    }
    {
      auto f = open_out(out / "asymptotics_report.txt");
      f << std::setprecision(17);
      f << "norm_rho_Lgamma = " << rep.norm_rho_lgamma << "\n";
      f << "norm_eta_L1 = " << rep.norm_eta_l1 << "\n";
      f << "norm_eta_L2 = " << rep.norm_eta_l2 << "\n";
      f << "final_dist_rho = " << rep.dist_rho_lgamma.back() << "\n";
      f << "final_dist_eta_L1 = " << rep.dist_eta_l1.back() << "\n";
      f << "final_kinetic_sup = " << rep.kinetic_sup.back() << "\n";
      f << "converged_rho = " << (rep.converged_rho ? "yes" : "no") << "\n";
      f << "converged_eta = " << (rep.converged_eta ? "yes" : "no") << "\n";
      f << "converged_kinetic = " << (rep.converged_kinetic ? "yes" : "no")
        << "\n";
      f << "trend_ok = " << (rep.trend_ok ? "yes" : "no") << "\n";
    }
    if (!quiet)
      log << "asymptotics: converged = " << (rep.converged() ? "yes" : "no")
          << ", trend_ok = " << (rep.trend_ok ? "yes" : "no") << "\n";
    return rep.converged() ? kExitOk : kExitStepper;
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const RootFindError& e) {
    log << "error: " << e.what() << "\n";
    return kExitRootFind;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitStepper;
  }
}

int cmd_sweep_delta(const RunConfig& c, std::ostream& log, bool quiet) {
  try {
    if (c.delta_schedule.empty())
      throw ConfigError("sweep-delta requires [sweep] deltas in the config");
    const Grid g = make_grid(c);
    const PotentialField pot = make_potential(c, g);
    const SimState init = make_initial_state(c, g, pot);
    const fs::path out = ensure_out_dir(c);
    write_echo(c, out);

    const double e0 = total_energy(init, pot, c.params).total();
    const StepConfig cfg = step_config(c, e0);
    const std::vector<DeltaSweepEntry> entries = delta_continuation(
        init, pot, c.params, cfg, c.run.t_end, c.delta_schedule);

    bool any_abort = false;
    {
      auto f = open_out(out / "sweep.csv");
      f << "delta,rho_power_integral,E_initial,E_final,steps,aborted\n";
      for (const auto& e : entries) {
        f << e.delta << ',' << e.rho_power_integral << ','
          << e.ledger.rows.front().e_total << ','
          << e.ledger.rows.back().e_total << ',' << e.ledger.rows.size() - 1
          << ',' << (e.aborted ? 1 : 0) << "\n";
        any_abort = any_abort || e.aborted;
      }
    }
    for (size_t i = 0; i < entries.size(); ++i)
      write_ledger(entries[i].ledger,
                   out / ("sweep_ledger_" + std::to_string(i) + ".csv"));
    if (!quiet)
      for (const auto& e : entries)
        log << "sweep: delta = " << e.delta
            << "  integral rho^(gamma+Theta) = " << e.rho_power_integral
            << (e.aborted ? "  [aborted]" : "") << "\n";
    return any_abort ? kExitStepper : kExitOk;
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const RootFindError& e) {
    log << "error: " << e.what() << "\n";
    return kExitRootFind;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitStepper;
  }
}

}  // namespace nss
