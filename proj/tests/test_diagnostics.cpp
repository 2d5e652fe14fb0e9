#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "nss/diagnostics.hpp"

using namespace nss;

namespace {

PotentialField linear_pot(const Grid& g, double slope) {
  return PotentialField::from_callable(
      g, [slope](double x, double) { return slope * x; }, true);
}

LedgerRow row_at(double time, double e_total, double diss) {
  LedgerRow r;
  r.time = time;
  r.e_total = e_total;
  r.dissipation_visc = diss;
  return r;
}

}  // namespace

TEST_CASE("energy audit margins and failure localization") {
  EnergyLedger led;
  led.rows = {row_at(0.0, 10.0, 0.0), row_at(1.0, 9.0, 0.9),
              row_at(2.0, 8.5, 0.4), row_at(3.0, 8.2, 0.2)};
  const double slack = 1e-12;

  const AuditResult ok = energy_inequality_audit(led, slack);
  CHECK(ok.pass);
  CHECK(ok.worst_step_margin == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(ok.decay_margin == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ok.cumulative_margin == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(ok.detail.find("PASS") != std::string::npos);

  // An energy rise beyond slack at step 2 must fail and be named.
  led.rows[2].e_total = 9.5;
  const AuditResult bad = energy_inequality_audit(led, slack);
  CHECK(!bad.pass);
  CHECK(bad.worst_step == 2);
  CHECK(bad.worst_step_margin < 0.0);
  CHECK(bad.detail.find("FAIL") != std::string::npos);

  EnergyLedger empty;
  empty.rows = {row_at(0.0, 1.0, 0.0)};
  CHECK(energy_inequality_audit(empty, slack).pass);
}

TEST_CASE("entropy bounds hold on random states and are tight at Gibbs") {
  const Grid g = Grid::line(0.0, 2.0, 64);
  const auto pot = PotentialField::from_callable(
      g, [](double x, double) { return 0.8 * x + 0.3 * std::sin(2.0 * x); },
      true);

  SUBCASE("equilibrium profile attains Gibbs equality") {
    SimState s = SimState::zeros(g);
    for (int c = 0; c < g.ncells(); ++c)
      s.eta[c] = 1.7 * std::exp(-pot.phi[c]);
    const EntropyBounds b = entropy_bounds_check(s, pot);
    CHECK(b.ok);
    CHECK(std::abs(b.margin_gibbs) <= 1e-12);
    CHECK(b.margin_neglog >= 0.0);
  }

  SUBCASE("random nonnegative states satisfy both bounds") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> d(0.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
      SimState s = SimState::zeros(g);
      for (int c = 0; c < g.ncells(); ++c)
        s.eta[c] = c % 7 == 0 ? 0.0 : d(rng);
      const EntropyBounds b = entropy_bounds_check(s, pot);
      CHECK_MESSAGE(b.ok, "trial " << trial << " neglog " << b.margin_neglog
                                   << " gibbs " << b.margin_gibbs);
      CHECK(b.margin_neglog >= -1e-12 * std::max(1.0, b.neglog_rhs));
      CHECK(b.margin_gibbs >= -1e-12 * std::max(1.0, std::abs(b.gibbs_lhs)));
    }
  }

  SUBCASE("zero state is harmless") {
    SimState s = SimState::zeros(g);
    const EntropyBounds b = entropy_bounds_check(s, pot);
    CHECK(b.ok);
    CHECK(b.neglog_lhs == 0.0);
    CHECK(b.gibbs_lhs == 0.0);
  }
}

TEST_CASE("test function derivatives match finite differences") {
  TestFunction tf;
  tf.dim = 2;
  tf.t_center = 0.5;
  tf.t_width = 0.3;
  tf.x_center = {0.4, 0.6};
  tf.x_width = {0.25, 0.2};

  const double eps = 1e-5;
  const std::array<std::array<double, 3>, 4> pts{{
      {0.45, 0.35, 0.55},
      {0.6, 0.5, 0.65},
      {0.38, 0.28, 0.52},
      {0.52, 0.47, 0.7},
  }};
  for (const auto& q : pts) {
    const double t = q[0];
    const std::array<double, 2> x{q[1], q[2]};

    const double fd_t =
        (tf.value(t + eps, x) - tf.value(t - eps, x)) / (2.0 * eps);
    CHECK(tf.dt(t, x) == doctest::Approx(fd_t).epsilon(1e-6));

    for (int a = 0; a < 2; ++a) {
      auto shift = [&](double d) {
        std::array<double, 2> y = x;
        y[a] += d;
        return y;
      };
      const double fd_x =
          (tf.value(t, shift(eps)) - tf.value(t, shift(-eps))) / (2.0 * eps);
      CHECK(tf.dx(a, t, x) == doctest::Approx(fd_x).epsilon(1e-6));
      const double fd_xx = (tf.value(t, shift(eps)) - 2.0 * tf.value(t, x) +
                            tf.value(t, shift(-eps))) /
                           (eps * eps);
      CHECK(std::abs(tf.dxx(a, t, x) - fd_xx) <=
            1e-7 + 1e-4 * std::abs(fd_xx));
    }
  }

  // Compact support: zero at and beyond the bump edges.
  CHECK(tf.value(0.5 + 0.3, {0.4, 0.6}) == 0.0);
  CHECK(tf.value(0.95, {0.4, 0.6}) == 0.0);
  CHECK(tf.value(0.5, {0.4 + 0.25, 0.6}) == 0.0);
  CHECK(tf.value(0.5, {0.4, 1.5}) == 0.0);
  CHECK(tf.dxx(0, 0.5, {0.66, 0.6}) == 0.0);
}

TEST_CASE("test bank is seeded, sized, and strictly interior") {
  const Grid g = Grid::line(0.0, 1.0, 32);
  const auto bank = make_test_bank(g, 0.0, 2.0, 6, 99);
  const auto bank2 = make_test_bank(g, 0.0, 2.0, 6, 99);
  const auto bank3 = make_test_bank(g, 0.0, 2.0, 6, 100);
  REQUIRE(bank.size() == 6);

  bool any_different = false;
  for (size_t i = 0; i < bank.size(); ++i) {
    CHECK(bank[i].t_center == bank2[i].t_center);
    CHECK(bank[i].x_center[0] == bank2[i].x_center[0]);
    if (bank[i].t_center != bank3[i].t_center) any_different = true;

    CHECK(bank[i].t_center - bank[i].t_width > 0.0);
    CHECK(bank[i].t_center + bank[i].t_width < 2.0);
    CHECK(bank[i].x_center[0] - bank[i].x_width[0] > 0.0);
    CHECK(bank[i].x_center[0] + bank[i].x_width[0] < 1.0);
  }
  CHECK(any_different);

  CHECK_THROWS_AS(make_test_bank(g, 1.0, 1.0, 3, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_test_bank(g, 0.0, 1.0, 0, 1), std::invalid_argument);
}

TEST_CASE("weak-form residuals validate their inputs") {
  const Grid g = Grid::line(0.0, 1.0, 16);
  const auto pot = linear_pot(g, 1.0);
  PhysParams p;
  const auto bank = make_test_bank(g, 0.0, 1.0, 2, 5);

  std::vector<SimState> traj(2, SimState::zeros(g));
  std::vector<double> times{0.0, 0.1};
  CHECK_THROWS_AS(weak_form_residuals(traj, times, pot, p, bank),
                  std::invalid_argument);

  traj.assign(3, SimState::zeros(g));
  times = {0.0, 0.2, 0.1};
  CHECK_THROWS_AS(weak_form_residuals(traj, times, pot, p, bank),
                  std::invalid_argument);

  times = {0.0, 0.1, 0.2};
  CHECK_NOTHROW(weak_form_residuals(traj, times, pot, p, bank));
}

TEST_CASE("weak-form residuals vanish on the exact stationary trajectory") {
  // A constant-in-time equilibrium trajectory solves every identity
  // exactly: the time telescopes drop out because the bank vanishes at both
  // ends, and the spatial integrands reduce to exact derivatives of
  // compactly supported smooth functions, so the midpoint sums are pure
  // quadrature error. That error decays faster than any mesh power, but the
  // constant is large at coarse N (the bump's Fourier tail goes like
  // exp(-c sqrt(N))), so pin both the decay between meshes and the
  // near-roundoff level on the finer one.
  PhysParams p;
  p.a = 1.0;
  p.gamma = 2.0;
  p.beta = 1.0;

  auto residuals = [&](int n) {
    const Grid g = Grid::line(0.0, 1.0, n);
    const auto pot = linear_pot(g, 1.0);
    const StationaryState st = solve_stationary(g, pot, p, 0.5, 1.0);
    SimState s = SimState::zeros(g);
    s.rho = st.rho_s;
    s.eta = st.eta_s;

    std::vector<SimState> traj;
    std::vector<double> times;
    for (int k = 0; k <= 6; ++k) {
      s.time = 0.1 * k;
      traj.push_back(s);
      times.push_back(s.time);
    }
    const auto bank = make_test_bank(g, 0.0, 0.6, 5, 77);
    return weak_form_residuals(traj, times, pot, p, bank);
  };

  const WeakFormResiduals coarse = residuals(512);
  const WeakFormResiduals fine = residuals(1024);
  REQUIRE(fine.continuity.size() == 5);
  REQUIRE(fine.momentum.size() == 5);
  REQUIRE(fine.particles.size() == 5);

  // Continuity is identically zero at rest, both meshes.
  for (double v : coarse.continuity) CHECK(std::abs(v) <= 1e-13);
  for (double v : fine.continuity) CHECK(std::abs(v) <= 1e-13);

  // Measured: momentum 3e-11 -> 3e-16, particles 3e-8 -> 1.3e-12.
  for (double v : fine.momentum) CHECK(std::abs(v) <= 1e-13);
  for (double v : fine.particles) CHECK(std::abs(v) <= 1e-10);
  CHECK(fine.max_abs() <= 1e-10);

  // Far faster than any fixed-order scheme: two mesh doublings of a second
  // order method would give 16x, this gives over 100x.
  double cm = 0.0, fm = 0.0;
  for (double v : coarse.particles) cm = std::max(cm, std::abs(v));
  for (double v : fine.particles) fm = std::max(fm, std::abs(v));
  CHECK(cm / std::max(fm, 1e-300) > 100.0);
}

TEST_CASE("asymptotics report: distances, suffix sup, windows, trend") {
  const Grid g = Grid::line(0.0, 1.0, 32);
  const int N = g.ncells();
  const double vol = g.cell_volume();

  // Hand-built stationary reference with simple numbers.
  StationaryState st;
  st.rho_s.assign(N, 1.0);
  st.eta_s.assign(N, 0.5);
  st.mass_rho = 1.0;
  st.mass_eta = 0.5;

  PhysParams p;
  p.gamma = 2.0;

  // Snapshots: mass-preserving two-cell perturbations of size eps_k and a
  // uniform velocity v_k. Kinetic energies are chosen non-monotone to pin
  // the suffix-sup rule.
  const std::vector<double> eps{0.2, 0.1, 0.05, 0.02};
  const std::vector<double> vels{2.0, 1.0, 1.4, 0.5};
  RunResult res;
  for (size_t k = 0; k < eps.size(); ++k) {
    SimState s = SimState::zeros(g);
    s.rho = st.rho_s;
    s.eta = st.eta_s;
    s.eta[0] += eps[k];
    s.eta[1] -= eps[k];
    s.rho[2] += eps[k];
    s.rho[3] -= eps[k];
    for (int c = 0; c < N; ++c) s.mom.comp[0][c] = s.rho[c] * vels[k];
    s.time = static_cast<double>(k);
    res.snapshots.push_back(s);
    res.snapshot_times.push_back(s.time);
  }
  // Ledger: unit steps with dissipation equal to the step index.
  res.ledger.rows.push_back(row_at(0.0, 1.0, 0.0));
  for (int j = 1; j <= 10; ++j)
    res.ledger.rows.push_back(row_at(j, 1.0, j));

  const AsymptoticsReport rep = asymptotics(res, st, p);
  REQUIRE(rep.time.size() == 4);

  // L^gamma distance of rho: two cells off by eps -> (2 eps^2 vol)^(1/2).
  for (size_t k = 0; k < 4; ++k) {
    CHECK(rep.dist_rho_lgamma[k] ==
          doctest::Approx(std::sqrt(2.0 * eps[k] * eps[k] * vol))
              .epsilon(1e-12));
    CHECK(rep.dist_eta_l1[k] ==
          doctest::Approx(2.0 * eps[k] * vol).epsilon(1e-12));
    CHECK(rep.dist_eta_l2[k] ==
          doctest::Approx(std::sqrt(2.0 * eps[k] * eps[k] * vol))
              .epsilon(1e-12));
  }

  // Kinetic energy of snapshot k: 1/2 sum rho v^2 vol = v^2/2 * mass.
  std::vector<double> kin(4);
  for (size_t k = 0; k < 4; ++k) {
    double m = 0.0;
    for (double r : res.snapshots[k].rho) m += r;
    kin[k] = 0.5 * vels[k] * vels[k] * m * vol;
  }
  CHECK(rep.kinetic_sup[0] == doctest::Approx(kin[0]));
  CHECK(rep.kinetic_sup[1] == doctest::Approx(kin[2]));  // suffix max
  CHECK(rep.kinetic_sup[2] == doctest::Approx(kin[2]));
  CHECK(rep.kinetic_sup[3] == doctest::Approx(kin[3]));

  // Window [t-1, t+2] over unit steps picks up h*D for times in (t-1, t+2].
  CHECK(rep.window_dissipation[0] == doctest::Approx(1.0 + 2.0));
  CHECK(rep.window_dissipation[2] == doctest::Approx(2.0 + 3.0 + 4.0));
  CHECK(rep.window_dissipation[3] == doctest::Approx(3.0 + 4.0 + 5.0));

  // Norms of the reference profiles.
  CHECK(rep.norm_rho_lgamma == doctest::Approx(1.0));
  CHECK(rep.norm_eta_l1 == doctest::Approx(0.5));
  CHECK(rep.norm_eta_l2 == doctest::Approx(std::sqrt(0.25)));

  // Distances shrink but the final kinetic energy is still large.
  CHECK(rep.trend_ok);
  CHECK(!rep.converged_kinetic);

  // Loose thresholds flip everything to converged.
  AsymptoticsThresholds loose;
  loose.dist_rel = 10.0;
  loose.kinetic_abs = 1e9;
  const AsymptoticsReport rep2 = asymptotics(res, st, p, loose);
  CHECK(rep2.converged());

  // Mass mismatch in any snapshot is rejected.
  RunResult broken = res;
  broken.snapshots[1].rho[0] += 1.0;
  CHECK_THROWS_AS(asymptotics(broken, st, p), std::invalid_argument);
}
