#include "nss/energy.hpp"

#include <cmath>

namespace nss {

double xlogx(double x) { return x > kEntropyFloor ? x * std::log(x) : 0.0; }

Masses masses(const SimState& s) {
  Masses m;
  for (double r : s.rho) m.rho += r;
  for (double e : s.eta) m.eta += e;
  const double vol = s.grid.cell_volume();
  m.rho *= vol;
  m.eta *= vol;
  return m;
}

EnergyBreakdown total_energy(const SimState& s, const PotentialField& pot,
                             const PhysParams& p) {
  const Grid& g = s.grid;
  const double vol = g.cell_volume();
  const double floor = vacuum_floor(s);
  EnergyBreakdown e;
  for (int c = 0; c < g.ncells(); ++c) {
    if (s.rho[c] > floor) {
      double m2 = s.mom.comp[0][c] * s.mom.comp[0][c];
      if (g.dim == 2) m2 += s.mom.comp[1][c] * s.mom.comp[1][c];
      e.kinetic += 0.5 * m2 / s.rho[c];
    }
    e.pressure += pressure_potential(s.rho[c], p);
    e.entropy += xlogx(s.eta[c]);
    e.potential += (p.beta * s.rho[c] + s.eta[c]) * pot.phi[c];
  }
  e.kinetic *= vol;
  e.pressure *= vol;
  e.entropy *= vol;
  e.potential *= vol;
  return e;
}

namespace {

// Cell-centered gradient of one velocity component along one axis:
// centered differences interior, one-sided at the walls (exact for linear
// fields, which pins the quadrature of |grad u|^2 on them).
double cell_gradient(const Grid& g, const ScalarField& f, int axis, int i,
                     int t) {
  const double dx = g.dx[axis];
  const int na = g.n[axis];
  auto at = [&](int k) {
    return axis == 0 ? f[g.cell_index(k, t)] : f[g.cell_index(t, k)];
  };
  if (i == 0) return (at(1) - at(0)) / dx;
  if (i == na - 1) return (at(na - 1) - at(na - 2)) / dx;
  return (at(i + 1) - at(i - 1)) / (2.0 * dx);
}

}  // namespace

DissipationSplit dissipation_split(const SimState& s,
                                   const PotentialField& pot,
                                   const PhysParams& p) {
  const Grid& g = s.grid;
  const double vol = g.cell_volume();
  const double floor = vacuum_floor(s);
  const VectorField u = velocity(s);
  DissipationSplit d;

  // mu |grad u|^2 + lambda |div u|^2, cell-centered gradients, vacuum cells
  // contribute nothing.
  for (int c = 0; c < g.ncells(); ++c) {
    if (s.rho[c] <= floor) continue;
    auto ij = g.cell_coords(c);
    double grad2 = 0.0, div = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      const int pos = a == 0 ? ij[0] : ij[1];
      const int t = a == 0 ? ij[1] : ij[0];
      for (int b = 0; b < g.dim; ++b) {
        const double gab = cell_gradient(g, u.comp[b], a, pos, t);
        grad2 += gab * gab;
        if (a == b) div += gab;
      }
    }
    d.visc += (p.mu * grad2 + p.lambda * div * div) * vol;
  }

  // |2 grad sqrt(eta) + sqrt(eta) grad Phi|^2 via interior faces.
  for (int a = 0; a < g.dim; ++a) {
    const double dx = g.dx[a];
    for (int t = 0; t < g.nrows(a); ++t)
      for (int f = 1; f < g.n[a]; ++f) {
        const int L = g.face_left_cell(a, f, t);
        const int R = g.face_right_cell(a, f, t);
        const double sL = std::sqrt(std::max(s.eta[L], 0.0));
        const double sR = std::sqrt(std::max(s.eta[R], 0.0));
        const double r = 2.0 * (sR - sL) / dx +
                         0.5 * (sL + sR) * pot.dphi.axis[a][g.face_index(a, f, t)];
        d.eta += r * r * vol;
      }
  }
  return d;
}

double dissipation(const SimState& s, const PotentialField& pot,
                   const PhysParams& p) {
  return dissipation_split(s, pot, p).total();
}

LedgerRow make_ledger_row(const SimState& s, const PotentialField& pot,
                          const PhysParams& p, double ineq_residual) {
  LedgerRow row;
  row.time = s.time;
  const Masses m = masses(s);
  row.mass_rho = m.rho;
  row.mass_eta = m.eta;
  const EnergyBreakdown e = total_energy(s, pot, p);
  row.e_total = e.total();
  row.e_kinetic = e.kinetic;
  row.e_pressure = e.pressure;
  row.e_entropy = e.entropy;
  row.e_potential = e.potential;
  const DissipationSplit d = dissipation_split(s, pot, p);
  row.dissipation_visc = d.visc;
  row.dissipation_eta = d.eta;
  row.ineq_residual = ineq_residual;
  return row;
}

}  // namespace nss
