#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "nss/commands.hpp"
#include "nss/config.hpp"
#include "nss/diagnostics.hpp"
#include "nss/stationary.hpp"
#include "nss/stepper.hpp"

using namespace nss;

// End-to-end acceptance checks. Each case prints one PASS/FAIL line so the
// suite doubles as a release checklist; the thresholds are pinned here and
// nowhere else.

namespace {

struct PresetRun {
  RunConfig cfg;
  Grid g;
  PotentialField pot;
  SimState init;
  RunResult res;
  double min_rho;
  double min_eta;
  double seconds;
};

PresetRun run_preset(const char* file) {
  const RunConfig cfg =
      parse_config_file(std::string(NSS_PRESET_DIR) + "/" + file);
  const Grid g = make_grid(cfg);
  PotentialField pot = make_potential(cfg, g);
  SimState init = make_initial_state(cfg, g, pot);

  const double e0 = total_energy(init, pot, cfg.params).total();
  StepConfig scfg;
  scfg.picard_tol = cfg.tol.picard_tol;
  scfg.picard_max = cfg.tol.picard_max;
  scfg.linear_tol = cfg.tol.linear_tol;
  scfg.energy_slack = cfg.tol.energy_slack_rel * std::abs(e0);

  double mr = std::numeric_limits<double>::infinity();
  double me = mr;
  for (double v : init.rho) mr = std::min(mr, v);
  for (double v : init.eta) me = std::min(me, v);

  const auto tic = std::chrono::steady_clock::now();
  RunResult res = run(init, pot, cfg.params, scfg, cfg.run.t_end,
                      cfg.run.sample_every,
                      [&](const SimState& s, const StepReport&) {
                        for (double v : s.rho) mr = std::min(mr, v);
                        for (double v : s.eta) me = std::min(me, v);
                      });
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - tic)
          .count();
  return PresetRun{cfg,           g,  std::move(pot), std::move(init),
                   std::move(res), mr, me,            secs};
}

const PresetRun& column() {
  static const PresetRun r = run_preset("column_1d.cfg");
  return r;
}
const PresetRun& double_well() {
  static const PresetRun r = run_preset("double_well_1d.cfg");
  return r;
}
const PresetRun& halfline() {
  static const PresetRun r = run_preset("halfline_1d.cfg");
  return r;
}

void report(int idx, const char* name, bool ok, const std::string& note = "") {
  std::printf("ACCEPTANCE %2d  %-52s %s%s%s\n", idx, name,
              ok ? "PASS" : "FAIL", note.empty() ? "" : "  -- ",
              note.c_str());
  std::fflush(stdout);
  CHECK_MESSAGE(ok, "acceptance " << idx << " (" << name << ") " << note);
}

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("acceptance 1") {
  bool ok = false;
  std::string note;
  try {
    const PresetRun& c = column();
    double drift = 0.0;
    const auto& rows = c.res.ledger.rows;
    for (const auto& r : rows) {
      drift = std::max(drift, std::abs(r.mass_rho - rows[0].mass_rho) /
                                  rows[0].mass_rho);
      drift = std::max(drift, std::abs(r.mass_eta - rows[0].mass_eta) /
                                  rows[0].mass_eta);
    }
    ok = !c.res.aborted && c.res.steps == 2000 && drift <= 1e-12 &&
         c.seconds <= 60.0;
    char buf[128];
    std::snprintf(buf, sizeof buf, "drift %.2e, %d steps, %.1f s", drift,
                  c.res.steps, c.seconds);
    note = buf;
  } catch (const std::exception& e) {
    note = e.what();
  }
  report(1, "mass conservation over the full column run", ok, note);
}

TEST_CASE("acceptance 2") {
  bool ok = false;
  std::string note;
  try {
    const PresetRun& c = column();
    const auto& rows = c.res.ledger.rows;
    const double slack = 1e-10 * std::abs(rows[0].e_total);
    double worst = std::numeric_limits<double>::infinity();
    double diss_budget = 0.0;
    for (size_t k = 1; k < rows.size(); ++k) {
      worst = std::min(worst, rows[k].ineq_residual + slack);
      diss_budget +=
          (rows[k].time - rows[k - 1].time) * rows[k].dissipation();
    }
    const double cum_margin = rows[0].e_total - rows.back().e_total +
                              (rows.size() - 1) * slack - diss_budget;
    ok = worst >= 0.0 && cum_margin >= 0.0;
    char buf[128];
    std::snprintf(buf, sizeof buf, "worst step margin %.2e, budget %.2e",
                  worst, cum_margin);
    note = buf;
  } catch (const std::exception& e) {
    note = e.what();
  }
  report(2, "per-step energy inequality and dissipation budget", ok, note);
}

TEST_CASE("acceptance 3") {
  bool ok = false;
  std::string note;
  try {
    const auto tic = std::chrono::steady_clock::now();
    const Grid g = Grid::line(0.0, 1.0, 1000);
    const auto pot = PotentialField::from_callable(
        g, [](double x, double) { return x; }, true);
    PhysParams p;  // a = 1, gamma = 2, beta = 1

    double c_half = 0.0, c_sixteenth = 0.0, c_eta = 0.0;
    solve_rho_s(g, pot, p, 0.5, &c_half);
    solve_rho_s(g, pot, p, 1.0 / 16, &c_sixteenth);
    solve_eta_s(g, pot, 1.0, &c_eta);

    // Midpoint quadrature reference for the particle constant.
    double part = 0.0;
    for (int c = 0; c < g.ncells(); ++c)
      part += std::exp(-g.cell_center(c)[0]);
    part *= g.cell_volume();
    const double c_eta_ref = 1.0 / part;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - tic)
            .count();

    ok = std::abs(c_half - 1.5) <= 1e-8 &&
         std::abs(c_sixteenth - 0.5) <= 1e-8 &&
         std::abs(c_eta - c_eta_ref) <= 1e-8 &&
         std::abs(c_eta - 1.0 / (1.0 - std::exp(-1.0))) <= 1e-6 &&
         secs <= 1.0;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "C_rho %.10f / %.10f, C_eta %.10f, %.2f s", c_half,
                  c_sixteenth, c_eta, secs);
    note = buf;
  } catch (const std::exception& e) {
    note = e.what();
  }
  report(3, "closed-form stationary constants", ok, note);
}

TEST_CASE("acceptance 4") {
  bool ok = false;
  std::string note;
  try {
    const auto tic = std::chrono::steady_clock::now();
    const PresetRun& c = column();
    const StationaryState st = solve_stationary(
        c.g, c.pot, c.cfg.params, c.cfg.initial.mass_rho,
        c.cfg.initial.mass_eta);

    SimState s = SimState::zeros(c.g);
    s.rho = st.rho_s;
    s.eta = st.eta_s;
    const double e0 = total_energy(s, c.pot, c.cfg.params).total();
    StepConfig scfg;
    scfg.picard_tol = c.cfg.tol.picard_tol;
    scfg.picard_max = c.cfg.tol.picard_max;
    scfg.linear_tol = c.cfg.tol.linear_tol;
    scfg.energy_slack = c.cfg.tol.energy_slack_rel * std::abs(e0);

    bool accepted = true;
    for (int k = 0; k < 100 && accepted; ++k)
      accepted = implicit_step(s, c.pot, c.cfg.params, scfg).accepted;

    double change = max_abs_diff(s.rho, st.rho_s);
    for (int a = 0; a < c.g.dim; ++a)
      for (double v : s.mom.comp[a]) change = std::max(change, std::abs(v));
    const double eta_drift = max_abs_diff(s.eta, st.eta_s);
    change = std::max(change, eta_drift);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - tic)
            .count();

    ok = accepted && change <= 1e-8 && eta_drift <= 1e-10 && secs <= 10.0;
    char buf[128];
    std::snprintf(buf, sizeof buf, "change %.2e, eta drift %.2e, %.1f s",
                  change, eta_drift, secs);
    note = buf;
  } catch (const std::exception& e) {
    note = e.what();
  }
  report(4, "discrete equilibrium is a 100-step fixed point", ok, note);
}

TEST_CASE("acceptance 5") {
  bool ok = false;
  std::string note;
  try {
    const PresetRun& c = column();
    const Masses m = masses(c.init);
    const StationaryState st =
        solve_stationary(c.g, c.pot, c.cfg.params, m.rho, m.eta);
    AsymptoticsThresholds thr;
    thr.dist_rel = c.cfg.tol.asym_dist_rel;
    thr.kinetic_abs = c.cfg.tol.asym_kinetic_abs;
    const AsymptoticsReport rep = asymptotics(c.res, st, c.cfg.params, thr);
    ok = !c.res.aborted && rep.converged() && rep.trend_ok &&
         c.seconds <= 300.0;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "final dist_rho %.2e, dist_eta %.2e, kinetic %.2e",
                  rep.dist_rho_lgamma.back(), rep.dist_eta_l1.back(),
                  rep.kinetic_sup.back());
    note = buf;
  } catch (const std::exception& e) {
    note = e.what();
  }
  report(5, "large-time convergence to the steady state", ok, note);
}

TEST_CASE("acceptance 6") {
  bool ok = false;
  std::string note;
  try {
    const double worst_rho = std::min(
        {column().min_rho, double_well().min_rho, halfline().min_rho});
    const double worst_eta = std::min(
        {column().min_eta, double_well().min_eta, halfline().min_eta});
    ok = worst_rho >= 0.0 && worst_eta >= 0.0 && !column().res.aborted &&
         !double_well().res.aborted && !halfline().res.aborted;
    char buf[128];
    std::snprintf(buf, sizeof buf, "min rho %.3e, min eta %.3e", worst_rho,
                  worst_eta);
    note = buf;
  } catch (const std::exception& e) {
    note = e.what();
  }
  report(6, "positivity at every accepted step of every preset", ok, note);
}

TEST_CASE("acceptance 7") {
  bool ok = false;
  std::string note;
  try {
    const auto tic = std::chrono::steady_clock::now();
    const PresetRun& c = column();
    const double e0 = total_energy(c.init, c.pot, c.cfg.params).total();
    StepConfig scfg;
    scfg.picard_tol = c.cfg.tol.picard_tol;
    scfg.picard_max = c.cfg.tol.picard_max;
    scfg.linear_tol = c.cfg.tol.linear_tol;
    scfg.energy_slack = c.cfg.tol.energy_slack_rel * std::abs(e0);

    const std::vector<double> deltas{1e-2, 1e-3, 0.0};
    const auto entries = delta_continuation(c.init, c.pot, c.cfg.params, scfg,
                                            c.cfg.run.t_end, deltas);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    bool none_aborted = true;
    for (const auto& e : entries) {
      lo = std::min(lo, e.rho_power_integral);
      hi = std::max(hi, e.rho_power_integral);
      none_aborted = none_aborted && !e.aborted;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - tic)
            .count();
    ok = entries.size() == 3 && none_aborted && lo > 0.0 && hi / lo <= 2.0 &&
         secs <= 600.0;
    char buf[128];
    std::snprintf(buf, sizeof buf, "integral spread %.6f, %.0f s", hi / lo,
                  secs);
    note = buf;
  } catch (const std::exception& e) {
    note = e.what();
  }
  report(7, "uniform density integrability across the delta sweep", ok, note);
}

TEST_CASE("acceptance 8") {
  bool ok = false;
  std::string note;
  try {
    double worst = std::numeric_limits<double>::infinity();
    int snaps = 0;
    for (const PresetRun* pr : {&column(), &double_well(), &halfline()}) {
      for (const SimState& s : pr->res.snapshots) {
        const EntropyBounds b = entropy_bounds_check(s, pr->pot);
        worst = std::min(
            {worst, b.margin_neglog / std::max(1.0, std::abs(b.neglog_rhs)),
             b.margin_gibbs / std::max(1.0, std::abs(b.gibbs_lhs))});
        ++snaps;
      }
    }
    ok = snaps > 0 && worst >= -1e-10;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d snapshots, worst margin %.2e", snaps,
                  worst);
    note = buf;
  } catch (const std::exception& e) {
    note = e.what();
  }
  report(8, "entropy bounds on every snapshot of every preset", ok, note);
}

TEST_CASE("acceptance 9") {
  bool ok = false;
  std::string note;
  try {
    const ConfinementReport good =
        validate_confinement(column().pot, column().cfg.params.beta);

    const ConfinementReport dw = validate_confinement(double_well().pot, 1.0);
    double pmin = std::numeric_limits<double>::infinity(), pmax = -pmin;
    for (double v : double_well().pot.phi) {
      pmin = std::min(pmin, v);
      pmax = std::max(pmax, v);
    }
    const bool dw_ok = !dw.pass && !dw.connectivity_ok &&
                       dw.worst_components >= 2 && dw.worst_threshold > pmin &&
                       dw.worst_threshold < pmax;

    // Same half-line potential, nonpositive coupling: must be rejected.
    const ConfinementReport neg = validate_confinement(halfline().pot, -1.0);
    const ConfinementReport zero = validate_confinement(halfline().pot, 0.0);
    const bool neg_ok = !neg.pass && !neg.beta_ok && !zero.pass &&
                        !zero.beta_ok;

    ok = good.pass && dw_ok && neg_ok;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "column %s, double well components %d at %.3f",
                  good.pass ? "pass" : "FAIL", dw.worst_components,
                  dw.worst_threshold);
    note = buf;
  } catch (const std::exception& e) {
    note = e.what();
  }
  report(9, "confinement validator verdicts", ok, note);
}

TEST_CASE("acceptance 10") {
  bool ok = false;
  std::string note;
  try {
    // The same smooth initial data sampled on both resolutions: the exact
    // stationary column profiles modulated by low-frequency factors.
    auto initial = [](const Grid& g) {
      SimState s = SimState::zeros(g);
      const double ceta = 1.0 / (1.0 - std::exp(-1.0));
      for (int c = 0; c < g.ncells(); ++c) {
        const double x = g.cell_center(c)[0];
        s.rho[c] = 0.5 * (1.5 - x) * (1.0 + 0.1 * std::sin(2.0 * M_PI * x));
        s.eta[c] = ceta * std::exp(-x) * (1.0 + 0.1 * std::sin(M_PI * x));
      }
      return s;
    };
    auto run_level = [&](int n, double h) {
      const Grid g = Grid::line(0.0, 1.0, n);
      const auto pot = PotentialField::from_callable(
          g, [](double x, double) { return x; }, true);
      PhysParams p = column().cfg.params;
      p.h = h;
      const SimState init = initial(g);
      StepConfig scfg;
      scfg.energy_slack =
          1e-10 * std::abs(total_energy(init, pot, p).total());
      RunResult res = run(init, pot, p, scfg, 0.4, 1);
      const auto bank = make_test_bank(g, 0.0, 0.4, 6, 2026);
      const WeakFormResiduals r =
          weak_form_residuals(res.snapshots, res.snapshot_times, pot, p, bank);
      return std::make_pair(res.aborted, r);
    };

    // Resolution pair chosen inside the asymptotic first-order regime: at
    // coarser pairs individual residual entries sit near sign crossings of
    // competing O(h) and O(dx) contributions and the measured ratio of a
    // single entry can degenerate even though the trajectory error shrinks
    // cleanly (the entries are signed integrals, not norms).
    const auto coarse = run_level(192, 0.001);
    const auto fine = run_level(384, 0.0005);

    bool ratios_ok = !coarse.first && !fine.first;
    double worst_ratio = std::numeric_limits<double>::infinity();
    auto check_list = [&](const std::vector<double>& c,
                          const std::vector<double>& f) {
      for (size_t i = 0; i < c.size(); ++i) {
        const double cc = std::abs(c[i]), ff = std::abs(f[i]);
        if (cc < 1e-12 && ff < 1e-12) continue;  // both at roundoff
        const double ratio = cc / std::max(ff, 1e-300);
        worst_ratio = std::min(worst_ratio, ratio);
        ratios_ok = ratios_ok && ratio >= 1.7;
      }
    };
    check_list(coarse.second.continuity, fine.second.continuity);
    check_list(coarse.second.momentum, fine.second.momentum);
    check_list(coarse.second.particles, fine.second.particles);

    ok = ratios_ok;
    char buf[128];
    std::snprintf(buf, sizeof buf, "worst refinement ratio %.2f",
                  worst_ratio);
    note = buf;
  } catch (const std::exception& e) {
    note = e.what();
  }
  report(10, "weak-form residual convergence under refinement", ok, note);
}
