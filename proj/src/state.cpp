#include "nss/state.hpp"

namespace nss {

SimState SimState::zeros(const Grid& g) {
  SimState s;
  s.grid = g;
  s.rho.assign(g.ncells(), 0.0);
  s.mom = VectorField(g);
  s.eta.assign(g.ncells(), 0.0);
  return s;
}

double vacuum_floor(const SimState& s) {
  double mass = 0.0;
  for (double r : s.rho) mass += r;
  mass *= s.grid.cell_volume();
  return 1e-12 * mass / s.grid.domain_volume();
}

VectorField velocity(const SimState& s) {
  VectorField u(s.grid);
  const double floor = vacuum_floor(s);
  for (int a = 0; a < s.grid.dim; ++a)
    for (int c = 0; c < s.grid.ncells(); ++c)
      u.comp[a][c] = s.rho[c] > floor ? s.mom.comp[a][c] / s.rho[c] : 0.0;
  return u;
}

void enforce_vacuum(SimState& s) {
  const double floor = vacuum_floor(s);
  for (int c = 0; c < s.grid.ncells(); ++c)
    if (s.rho[c] <= floor)
      for (int a = 0; a < s.grid.dim; ++a) s.mom.comp[a][c] = 0.0;
}

}  // namespace nss
