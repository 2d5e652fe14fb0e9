#include "nss/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include "nss/spatial.hpp"
#include "nss/state.hpp"

namespace nss {

namespace {

double quadrature_mass(const Grid& g, const ScalarField& f) {
  double s = 0.0;
  for (double v : f) s += v;
  return s * g.cell_volume();
}

ScalarField rho_profile(const Grid& g, const PotentialField& pot,
                        const PhysParams& p, double C) {
  const double coef = (p.gamma - 1.0) / (p.a * p.gamma);
  const double expo = 1.0 / (p.gamma - 1.0);
  ScalarField rho(g.ncells(), 0.0);
  for (int c = 0; c < g.ncells(); ++c) {
    const double arg = coef * std::max(C - p.beta * pot.phi[c], 0.0);
    rho[c] = arg > 0.0 ? std::pow(arg, expo) : 0.0;
  }
  return rho;
}

}  // namespace

ScalarField solve_eta_s(const Grid& g, const PotentialField& pot,
                        double mass_eta, double* C_eta_out) {
  if (!(mass_eta > 0.0))
    throw std::invalid_argument("solve_eta_s: mass_eta must be positive");
  ScalarField eta(g.ncells(), 0.0);
  double z = 0.0;
  for (int c = 0; c < g.ncells(); ++c) z += std::exp(-pot.phi[c]);
  z *= g.cell_volume();
  const double C = mass_eta / z;
  for (int c = 0; c < g.ncells(); ++c) eta[c] = C * std::exp(-pot.phi[c]);
  // The field uses the min-normalized samples; the reported constant refers
  // to the potential as given, so undo the shift.
  if (C_eta_out) *C_eta_out = C * std::exp(pot.normalization_shift);
  return eta;
}

ScalarField solve_rho_s(const Grid& g, const PotentialField& pot,
                        const PhysParams& p, double mass_rho,
                        double* C_rho_out, int* iters_out,
                        double* mass_residual_out) {
  p.validate();
  if (!(mass_rho > 0.0))
    throw std::invalid_argument("solve_rho_s: mass_rho must be positive");

  auto mass_at = [&](double C) {
    return quadrature_mass(g, rho_profile(g, pot, p, C));
  };

  // mass(C) vanishes for C <= min beta Phi and increases without bound, so
  // the lower bracket is exact and the upper one is found by doubling.
  double lo = p.beta * pot.phi[0];
  for (int c = 1; c < g.ncells(); ++c)
    lo = std::min(lo, p.beta * pot.phi[c]);
  double width = std::max(1.0, std::abs(lo));
  double hi = lo + width;
  int expansions = 0;
  while (mass_at(hi) < mass_rho) {
    width *= 2.0;
    hi = lo + width;
    if (++expansions > 200)
      throw RootFindError("solve_rho_s: could not bracket the target mass");
  }

  const double rel_tol = 1e-10;
  double mid = hi;
  double residual = std::abs(mass_at(mid) - mass_rho);
  int iters = 0;
  while (residual > rel_tol * mass_rho) {
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(mid)) || iters >= 400)
      throw RootFindError(
          "solve_rho_s: bisection stalled before reaching the mass tolerance");
    mid = 0.5 * (lo + hi);
    const double m = mass_at(mid);
    residual = std::abs(m - mass_rho);
    if (m < mass_rho)
      lo = mid;
    else
      hi = mid;
    ++iters;
  }

  // Bisection ran against the min-normalized samples; report the constant
  // for the potential as given.
  if (C_rho_out) *C_rho_out = mid + p.beta * pot.normalization_shift;
  if (iters_out) *iters_out = iters;
  if (mass_residual_out) *mass_residual_out = residual / mass_rho;
  return rho_profile(g, pot, p, mid);
}

StationaryState solve_stationary(const Grid& g, const PotentialField& pot,
                                 const PhysParams& p, double mass_rho,
                                 double mass_eta) {
  StationaryState st;
  st.rho_s = solve_rho_s(g, pot, p, mass_rho, &st.C_rho, &st.bisect_iters,
                         &st.mass_residual);
  if (mass_eta == 0.0) {
    st.eta_s.assign(g.ncells(), 0.0);
    st.C_eta = 0.0;
  } else {
    st.eta_s = solve_eta_s(g, pot, mass_eta, &st.C_eta);
  }
  st.mass_rho = quadrature_mass(g, st.rho_s);
  st.mass_eta = quadrature_mass(g, st.eta_s);
  return st;
}

StationaryResidual stationary_residual(const Grid& g,
                                       const PotentialField& pot,
                                       const PhysParams& p,
                                       const ScalarField& rho_s,
                                       const ScalarField& eta_s) {
  StationaryResidual r;
  const FaceArrays zero_u(g);
  const FaceArrays J = particle_flux(g, eta_s, pot, zero_u);
  for (int a = 0; a < g.dim; ++a) {
    const double dx = g.dx[a];
    for (int t = 0; t < g.nrows(a); ++t)
      for (int f = 1; f < g.n[a]; ++f) {
        const int idx = g.face_index(a, f, t);
        const int L = g.face_left_cell(a, f, t);
        const int R = g.face_right_cell(a, f, t);
        const double dphi = pot.dphi.axis[a][idx];

        if (rho_s[L] > 0.0 && rho_s[R] > 0.0) {
          const double dp = (pressure(rho_s[R], p) - pressure(rho_s[L], p)) / dx;
          const double fr = dp + p.beta * 0.5 * (rho_s[L] + rho_s[R]) * dphi;
          r.rho_max = std::max(r.rho_max, std::abs(fr));
        }
        const double de = (eta_s[R] - eta_s[L]) / dx +
                          0.5 * (eta_s[L] + eta_s[R]) * dphi;
        r.eta_fd_max = std::max(r.eta_fd_max, std::abs(de));
        r.eta_flux_max = std::max(r.eta_flux_max, std::abs(J.axis[a][idx]));
      }
  }
  return r;
}

namespace {

// Connected components of the strict sub-level set {phi < k} under axis
// adjacency. An empty set reports zero components.
int component_count(const Grid& g, const ScalarField& phi, double k) {
  const int N = g.ncells();
  std::vector<char> inside(N), seen(N, 0);
  for (int c = 0; c < N; ++c) inside[c] = phi[c] < k ? 1 : 0;
  int comps = 0;
  std::queue<int> q;
  for (int start = 0; start < N; ++start) {
    if (!inside[start] || seen[start]) continue;
    ++comps;
    seen[start] = 1;
    q.push(start);
    while (!q.empty()) {
      const int c = q.front();
      q.pop();
      const int i = c % g.n[0];
      const int j = c / g.n[0];
      int nbrs[4];
      int nn = 0;
      if (i > 0) nbrs[nn++] = c - 1;
      if (i < g.n[0] - 1) nbrs[nn++] = c + 1;
      if (g.dim == 2 && j > 0) nbrs[nn++] = c - g.n[0];
      if (g.dim == 2 && j < g.n[1] - 1) nbrs[nn++] = c + g.n[0];
      for (int m = 0; m < nn; ++m)
        if (inside[nbrs[m]] && !seen[nbrs[m]]) {
          seen[nbrs[m]] = 1;
          q.push(nbrs[m]);
        }
    }
  }
  return comps;
}

}  // namespace

std::string ConfinementReport::summary() const {
  std::ostringstream os;
  os << "confinement: " << (pass ? "PASS" : "FAIL") << " ("
     << (bounded ? "bounded" : "truncated unbounded") << " domain)\n";
  os << "  sub-level connectivity: " << (connectivity_ok ? "ok" : "FAIL");
  if (!connectivity_ok)
    os << " (" << worst_components << " components at threshold "
       << worst_threshold << ")";
  os << "\n";
  if (!bounded) {
    os << "  beta > 0: " << (beta_ok ? "ok" : "FAIL") << "\n";
    os << "  tail of exp(-Phi/2): " << (tail_ok ? "ok" : "FAIL")
       << " (outer shell fraction " << tail_fraction << ")\n";
    os << "  growth fits: " << (growth_ok ? "ok" : "FAIL") << " (c1 = " << c1
       << ", c2 = " << c2 << " outside r = " << growth_radius << ")\n";
  }
  for (const auto& f : failures) os << "  - " << f << "\n";
  return os.str();
}

ConfinementReport validate_confinement(const PotentialField& pot,
                                       double beta) {
  const Grid& g = pot.grid;
  ConfinementReport rep;
  rep.bounded = pot.bounded_domain;

  for (double v : pot.phi)
    if (!std::isfinite(v)) rep.finite_ok = false;
  if (!rep.finite_ok)
    rep.failures.push_back("potential has non-finite samples");

  double pmin = pot.phi[0], pmax = pot.phi[0];
  for (double v : pot.phi) {
    pmin = std::min(pmin, v);
    pmax = std::max(pmax, v);
  }
  for (int i = 1; i <= 16; ++i) {
    const double k = pmin + (pmax - pmin) * i / 16.0;
    const int comps = component_count(g, pot.phi, k);
    if (comps > 1) {
      rep.connectivity_ok = false;
      rep.worst_threshold = k;
      rep.worst_components = comps;
      std::ostringstream os;
      os << "sub-level set at threshold " << k << " splits into " << comps
         << " components";
      rep.failures.push_back(os.str());
      break;
    }
  }

  if (!rep.bounded) {
    rep.beta_ok = beta > 0.0;
    if (!rep.beta_ok)
      rep.failures.push_back("buoyancy coupling beta must be positive on "
                             "truncated unbounded domains");

    // Outer-shell mass of exp(-Phi/2) against its total.
    double total = 0.0, shell = 0.0, rmax = 0.0;
    for (int c = 0; c < g.ncells(); ++c)
      rmax = std::max(rmax, g.center_radius(c));
    for (int c = 0; c < g.ncells(); ++c) {
      const double w = std::exp(-0.5 * pot.phi[c]);
      total += w;
      if (g.center_radius(c) >= 0.9 * rmax) shell += w;
    }
    rep.tail_fraction = total > 0.0 ? shell / total : 1.0;
    rep.tail_ok = rep.tail_fraction < 0.05;
    if (!rep.tail_ok) {
      std::ostringstream os;
      os << "exp(-Phi/2) is not tail-integrable: outer shell holds "
         << rep.tail_fraction * 100.0 << "% of the integral";
      rep.failures.push_back(os.str());
    }

    // Growth fits outside half the domain radius: |Lap Phi| <= c1 |grad Phi|
    // and c1 |grad Phi| <= c2 Phi, with Phi positive there.
    rep.growth_radius = 0.5 * rmax;
    bool positive_ok = true;
    double c1 = 0.0, c2 = 0.0;
    double gmax = 0.0;
    for (int c = 0; c < g.ncells(); ++c) {
      if (g.center_radius(c) <= rep.growth_radius) continue;
      double g2 = 0.0;
      for (int a = 0; a < g.dim; ++a)
        g2 += pot.grad.comp[a][c] * pot.grad.comp[a][c];
      gmax = std::max(gmax, std::sqrt(g2));
    }
    const double gfloor = 1e-12 * std::max(1.0, gmax);
    for (int c = 0; c < g.ncells(); ++c) {
      if (g.center_radius(c) <= rep.growth_radius) continue;
      if (!(pot.phi[c] > 0.0)) {
        positive_ok = false;
        continue;
      }
      double g2 = 0.0;
      for (int a = 0; a < g.dim; ++a)
        g2 += pot.grad.comp[a][c] * pot.grad.comp[a][c];
      const double gnorm = std::max(std::sqrt(g2), gfloor);
      c1 = std::max(c1, std::abs(pot.lap[c]) / gnorm);
      c2 = std::max(c2, gnorm / pot.phi[c]);
    }
    rep.c1 = c1;
    rep.c2 = c2 * std::max(c1, 1.0);
    rep.growth_ok = positive_ok && rep.c1 < 1e6 && rep.c2 < 1e6;
    if (!positive_ok)
      rep.failures.push_back(
          "potential is not positive outside half the domain radius");
    else if (!rep.growth_ok)
      rep.failures.push_back("no moderate growth constants c1, c2 fit the "
                             "potential outside half the domain radius");
  }

  rep.pass = rep.finite_ok && rep.connectivity_ok &&
             (rep.bounded || (rep.beta_ok && rep.tail_ok && rep.growth_ok));
  return rep;
}

}  // namespace nss
