#include "nss/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "nss/spatial.hpp"

namespace nss {

AuditResult energy_inequality_audit(const EnergyLedger& ledger, double slack) {
  AuditResult r;
  const auto& rows = ledger.rows;
  if (rows.size() < 2) {
    r.pass = true;
    r.detail = "ledger has no steps to audit";
    return r;
  }
  const double E0 = rows[0].e_total;
  double worst_step = std::numeric_limits<double>::infinity();
  int worst_idx = -1;
  double decay = std::numeric_limits<double>::infinity();
  double budget = 0.0;
  for (size_t k = 1; k < rows.size(); ++k) {
    const double h = rows[k].time - rows[k - 1].time;
    const double residual =
        rows[k - 1].e_total - rows[k].e_total - h * rows[k].dissipation();
    budget += h * rows[k].dissipation();
    if (residual + slack < worst_step) {
      worst_step = residual + slack;
      worst_idx = static_cast<int>(k);
    }
    decay = std::min(decay, E0 + k * slack - rows[k].e_total);
  }
  const size_t K = rows.size() - 1;
  r.worst_step_margin = worst_step;
  r.worst_step = worst_idx;
  r.decay_margin = decay;
  r.cumulative_margin = E0 - rows.back().e_total + K * slack - budget;
  r.pass = r.worst_step_margin >= 0.0 && r.decay_margin >= 0.0 &&
           r.cumulative_margin >= 0.0;
  std::ostringstream os;
  os << "steps audited: " << K << "\n"
     << "worst per-step margin: " << r.worst_step_margin << " at step "
     << r.worst_step << "\n"
     << "energy decay margin: " << r.decay_margin << "\n"
     << "dissipation budget margin: " << r.cumulative_margin << "\n"
     << (r.pass ? "PASS" : "FAIL") << "\n";
  r.detail = os.str();
  return r;
}

EntropyBounds entropy_bounds_check(const SimState& s,
                                   const PotentialField& pot) {
  const Grid& g = s.grid;
  const double vol = g.cell_volume();
  EntropyBounds b;
  double mass = 0.0, phi_eta = 0.0, exp_half = 0.0, exp_full = 0.0,
         ent = 0.0, neg = 0.0;
  for (int c = 0; c < g.ncells(); ++c) {
    const double eta = s.eta[c];
    const double phi = pot.phi[c];
    mass += eta;
    phi_eta += phi * eta;
    exp_half += std::exp(-0.5 * phi);
    exp_full += std::exp(-phi);
    const double xl = xlogx(eta);
    ent += xl;
    neg += std::max(-xl, 0.0);
  }
  mass *= vol;
  phi_eta *= vol;
  exp_half *= vol;
  exp_full *= vol;
  ent *= vol;
  neg *= vol;

  b.neglog_lhs = neg;
  b.neglog_rhs = 0.5 * phi_eta + exp_half / std::exp(1.0);
  b.margin_neglog = b.neglog_rhs - b.neglog_lhs;

  b.gibbs_lhs = ent + phi_eta;
  b.gibbs_rhs = mass > 0.0 ? mass * std::log(mass / exp_full) : 0.0;
  b.margin_gibbs = b.gibbs_lhs - b.gibbs_rhs;

  const double scale_n = std::max(1.0, std::abs(b.neglog_rhs));
  const double scale_g = std::max(1.0, std::abs(b.gibbs_lhs));
  b.ok = b.margin_neglog >= -1e-12 * scale_n &&
         b.margin_gibbs >= -1e-12 * scale_g;
  return b;
}

namespace {

// exp(1 - 1/(1 - s^2)) on |s| < 1, extended by zero. The 1e-8 guard keeps
// the derivative factor finite where the exponential already underflows.
double bump(double s) {
  const double q = 1.0 - s * s;
  if (q <= 1e-8) return 0.0;
  return std::exp(1.0 - 1.0 / q);
}

double bump_deriv(double s) {
  const double q = 1.0 - s * s;
  if (q <= 1e-8) return 0.0;
  return -2.0 * s / (q * q) * std::exp(1.0 - 1.0 / q);
}

// Second derivative via (log bump)' = -2s/q^2: bump'' = (g' + g^2) bump.
double bump_second(double s) {
  const double q = 1.0 - s * s;
  if (q <= 1e-8) return 0.0;
  const double gl = -2.0 * s / (q * q);
  const double glp = (-2.0 * q - 8.0 * s * s) / (q * q * q);
  return (glp + gl * gl) * std::exp(1.0 - 1.0 / q);
}

// Cell-centered first differences, one-sided at the walls.
ScalarField cell_gradient(const Grid& g, const ScalarField& f, int axis) {
  ScalarField out(g.ncells(), 0.0);
  const double dx = g.dx[axis];
  for (int t = 0; t < g.nrows(axis); ++t) {
    const int na = g.n[axis];
    auto cell = [&](int i) {
      return axis == 0 ? g.cell_index(i, t) : g.cell_index(t, i);
    };
    for (int i = 0; i < na; ++i) {
      if (i == 0)
        out[cell(i)] = (f[cell(1)] - f[cell(0)]) / dx;
      else if (i == na - 1)
        out[cell(i)] = (f[cell(na - 1)] - f[cell(na - 2)]) / dx;
      else
        out[cell(i)] = (f[cell(i + 1)] - f[cell(i - 1)]) / (2.0 * dx);
    }
  }
  return out;
}

}  // namespace

double TestFunction::value(double t, const std::array<double, 2>& x) const {
  double v = bump((t - t_center) / t_width);
  for (int a = 0; a < dim; ++a) v *= bump((x[a] - x_center[a]) / x_width[a]);
  return v;
}

double TestFunction::dt(double t, const std::array<double, 2>& x) const {
  double v = bump_deriv((t - t_center) / t_width) / t_width;
  for (int a = 0; a < dim; ++a) v *= bump((x[a] - x_center[a]) / x_width[a]);
  return v;
}

double TestFunction::dx(int axis, double t,
                        const std::array<double, 2>& x) const {
  double v = bump((t - t_center) / t_width);
  for (int a = 0; a < dim; ++a) {
    const double s = (x[a] - x_center[a]) / x_width[a];
    v *= a == axis ? bump_deriv(s) / x_width[a] : bump(s);
  }
  return v;
}

double TestFunction::dxx(int axis, double t,
                         const std::array<double, 2>& x) const {
  double v = bump((t - t_center) / t_width);
  for (int a = 0; a < dim; ++a) {
    const double s = (x[a] - x_center[a]) / x_width[a];
    v *= a == axis ? bump_second(s) / (x_width[a] * x_width[a]) : bump(s);
  }
  return v;
}

std::vector<TestFunction> make_test_bank(const Grid& g, double t0, double t1,
                                         int count, std::uint64_t seed) {
  if (count <= 0) throw std::invalid_argument("make_test_bank: count must be positive");
  if (!(t1 > t0)) throw std::invalid_argument("make_test_bank: empty time interval");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> tc(0.3, 0.7), tw(0.15, 0.28);
  std::uniform_real_distribution<double> xc(0.35, 0.65), xw(0.2, 0.3);
  std::vector<TestFunction> bank;
  bank.reserve(count);
  for (int i = 0; i < count; ++i) {
    TestFunction f;
    f.dim = g.dim;
    f.t_center = t0 + tc(rng) * (t1 - t0);
    f.t_width = tw(rng) * (t1 - t0);
    for (int a = 0; a < g.dim; ++a) {
      const double L = g.hi[a] - g.lo[a];
      f.x_center[a] = g.lo[a] + xc(rng) * L;
      f.x_width[a] = xw(rng) * L;
    }
    bank.push_back(f);
  }
  return bank;
}

double WeakFormResiduals::max_abs() const {
  double m = 0.0;
  for (double v : continuity) m = std::max(m, std::abs(v));
  for (double v : momentum) m = std::max(m, std::abs(v));
  for (double v : particles) m = std::max(m, std::abs(v));
  return m;
}

WeakFormResiduals weak_form_residuals(const std::vector<SimState>& traj,
                                      const std::vector<double>& times,
                                      const PotentialField& pot,
                                      const PhysParams& p,
                                      const std::vector<TestFunction>& bank) {
  p.validate();
  if (traj.size() != times.size() || traj.size() < 3)
    throw std::invalid_argument(
        "weak_form_residuals: need matching snapshot and time lists with at "
        "least three entries");
  for (size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1]))
      throw std::invalid_argument("weak_form_residuals: times must increase");

  const Grid& g = traj[0].grid;
  const double vol = g.cell_volume();
  const size_t B = bank.size();
  WeakFormResiduals r;
  r.continuity.assign(B, 0.0);
  r.momentum.assign(B * g.dim, 0.0);
  r.particles.assign(B, 0.0);

  // The discrete trajectory extends piecewise-constant on (t_{k-1}, t_k].
  // The dt(phi) pairing is integrated exactly in time (field_k times the
  // test-function increment over the interval). The flux terms hold the
  // fields fixed on each interval, so their time dependence comes from the
  // smooth test function alone; two-point Gauss quadrature per interval
  // integrates that factor to O(h^5), leaving the reported residual
  // dominated by the scheme defect and the spatial mapping error rather
  // than by the evaluator's own time quadrature.
  static constexpr double kGauss = 0.28867513459481287;  // 1/(2 sqrt(3))
  for (size_t k = 1; k < traj.size(); ++k) {
    const SimState& s = traj[k];
    const double tk = times[k];
    const double hk = times[k] - times[k - 1];
    const double tmid = 0.5 * (times[k] + times[k - 1]);
    const std::array<double, 2> tg{tmid - hk * kGauss, tmid + hk * kGauss};
    const VectorField u = velocity(s);

    ScalarField div_u(g.ncells(), 0.0);
    std::array<std::array<ScalarField, 2>, 2> grad_u;  // [comp][axis]
    for (int b = 0; b < g.dim; ++b)
      for (int a = 0; a < g.dim; ++a) {
        grad_u[b][a] = cell_gradient(g, u.comp[b], a);
        if (a == b)
          for (int c = 0; c < g.ncells(); ++c) div_u[c] += grad_u[b][a][c];
      }
    for (size_t i = 0; i < B; ++i) {
      const TestFunction& tf = bank[i];
      double acc_cont = 0.0, acc_part = 0.0;
      std::array<double, 2> acc_mom{0.0, 0.0};
      for (int c = 0; c < g.ncells(); ++c) {
        const auto x = g.cell_center(c);
        const double dphi_t = tf.value(tk, x) - tf.value(times[k - 1], x);
        acc_cont += s.rho[c] * dphi_t;
        acc_part += s.eta[c] * dphi_t;
        for (int b = 0; b < g.dim; ++b)
          acc_mom[b] += s.mom.comp[b][c] * dphi_t;

        const double press = pressure(s.rho[c], p) + s.eta[c];
        for (double t : tg) {
          const double wq = 0.5 * hk;  // Gauss-Legendre weights, 2 nodes
          const double phi_t = tf.value(t, x);
          std::array<double, 2> gphi{0.0, 0.0};
          double lap_phi = 0.0;
          for (int a = 0; a < g.dim; ++a) {
            gphi[a] = tf.dx(a, t, x);
            lap_phi += tf.dxx(a, t, x);
          }

          double u_dot_gphi = 0.0, gradphi_dot_gphi = 0.0;
          for (int a = 0; a < g.dim; ++a) {
            u_dot_gphi += u.comp[a][c] * gphi[a];
            gradphi_dot_gphi += pot.grad.comp[a][c] * gphi[a];
          }

          acc_cont += wq * s.rho[c] * u_dot_gphi;
          acc_part += wq * (s.eta[c] * (u_dot_gphi - gradphi_dot_gphi) +
                            s.eta[c] * lap_phi);
          for (int b = 0; b < g.dim; ++b) {
            double visc = 0.0;
            for (int a = 0; a < g.dim; ++a) visc += grad_u[b][a][c] * gphi[a];
            acc_mom[b] += wq * (s.mom.comp[b][c] * u_dot_gphi +
                                press * gphi[b] - p.mu * visc -
                                p.lambda * div_u[c] * gphi[b] -
                                (s.eta[c] + p.beta * s.rho[c]) *
                                    pot.grad.comp[b][c] * phi_t);
          }
        }
      }
      r.continuity[i] += acc_cont * vol;
      r.particles[i] += acc_part * vol;
      for (int b = 0; b < g.dim; ++b)
        r.momentum[i * g.dim + b] += acc_mom[b] * vol;
    }
  }
  return r;
}

AsymptoticsReport asymptotics(const RunResult& result,
                              const StationaryState& st, const PhysParams& p,
                              const AsymptoticsThresholds& thr) {
  p.validate();
  if (result.snapshots.empty())
    throw std::invalid_argument("asymptotics: no snapshots");
  const Grid& g = result.snapshots[0].grid;
  const double vol = g.cell_volume();

  for (const SimState& s : result.snapshots) {
    double mr = 0.0, me = 0.0;
    for (double v : s.rho) mr += v;
    for (double v : s.eta) me += v;
    mr *= vol;
    me *= vol;
    if (std::abs(mr - st.mass_rho) > 1e-8 * std::max(st.mass_rho, 1e-300) ||
        std::abs(me - st.mass_eta) > 1e-8 * std::max(st.mass_eta, 1e-300))
      throw std::invalid_argument(
          "asymptotics: snapshot masses do not match the stationary masses");
  }

  AsymptoticsReport rep;
  const size_t K = result.snapshots.size();
  rep.time = result.snapshot_times;
  rep.dist_rho_lgamma.resize(K);
  rep.kinetic_sup.resize(K);
  rep.dist_eta_l1.resize(K);
  rep.dist_eta_l2.resize(K);
  rep.window_dissipation.resize(K);

  double nr = 0.0, n1 = 0.0, n2 = 0.0;
  for (int c = 0; c < g.ncells(); ++c) {
    nr += std::pow(std::abs(st.rho_s[c]), p.gamma);
    n1 += std::abs(st.eta_s[c]);
    n2 += st.eta_s[c] * st.eta_s[c];
  }
  rep.norm_rho_lgamma = std::pow(nr * vol, 1.0 / p.gamma);
  rep.norm_eta_l1 = n1 * vol;
  rep.norm_eta_l2 = std::sqrt(n2 * vol);

  std::vector<double> kinetic(K);
  for (size_t k = 0; k < K; ++k) {
    const SimState& s = result.snapshots[k];
    const double floor = vacuum_floor(s);
    double dr = 0.0, d1 = 0.0, d2 = 0.0, kin = 0.0;
    for (int c = 0; c < g.ncells(); ++c) {
      dr += std::pow(std::abs(s.rho[c] - st.rho_s[c]), p.gamma);
      const double de = s.eta[c] - st.eta_s[c];
      d1 += std::abs(de);
      d2 += de * de;
      if (s.rho[c] > floor) {
        double m2 = 0.0;
        for (int a = 0; a < g.dim; ++a)
          m2 += s.mom.comp[a][c] * s.mom.comp[a][c];
        kin += 0.5 * m2 / s.rho[c];
      }
    }
    rep.dist_rho_lgamma[k] = std::pow(dr * vol, 1.0 / p.gamma);
    rep.dist_eta_l1[k] = d1 * vol;
    rep.dist_eta_l2[k] = std::sqrt(d2 * vol);
    kinetic[k] = kin * vol;
  }
  double sup = 0.0;
  for (size_t k = K; k-- > 0;) {
    sup = std::max(sup, kinetic[k]);
    rep.kinetic_sup[k] = sup;
  }

  // Dissipation integral over the sliding window [t-1, t+2], clipped to the
  // simulated interval, read off the ledger.
  const auto& rows = result.ledger.rows;
  for (size_t k = 0; k < K; ++k) {
    const double wlo = rep.time[k] - 1.0;
    const double whi = rep.time[k] + 2.0;
    double acc = 0.0;
    for (size_t j = 1; j < rows.size(); ++j) {
      if (rows[j].time > wlo && rows[j].time <= whi)
        acc += (rows[j].time - rows[j - 1].time) * rows[j].dissipation();
    }
    rep.window_dissipation[k] = acc;
  }

  rep.converged_rho =
      rep.dist_rho_lgamma.back() <= thr.dist_rel * rep.norm_rho_lgamma;
  rep.converged_eta =
      rep.dist_eta_l1.back() <= thr.dist_rel * rep.norm_eta_l1 &&
      rep.dist_eta_l2.back() <= thr.dist_rel * rep.norm_eta_l2;
  rep.converged_kinetic = rep.kinetic_sup.back() <= thr.kinetic_abs;

  auto median_trend = [](const std::vector<double>& v) {
    if (v.size() < 3) return v.back() <= v.front();
    std::vector<double> d(v.size() - 1);
    for (size_t i = 0; i + 1 < v.size(); ++i) d[i] = v[i + 1] - v[i];
    std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
    return d[d.size() / 2] <= 0.0;
  };
  rep.trend_ok = median_trend(rep.dist_rho_lgamma) &&
                 median_trend(rep.dist_eta_l1) && median_trend(kinetic);
  return rep;
}

}  // namespace nss
