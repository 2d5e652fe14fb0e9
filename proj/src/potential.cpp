#include "nss/potential.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nss {

namespace {

// Cell-centered first and second differences along one axis. Interior cells
// use centered stencils; wall cells fall back to one-sided estimates (exact
// for linear resp. quadratic data), good enough for the confinement
// validator and the weak-form diagnostics.
void cell_derivatives(const Grid& g, const ScalarField& phi, int axis,
                      ScalarField& d1, ScalarField& d2) {
  const double dx = g.dx[axis];
  const int na = g.n[axis];
  for (int t = 0; t < g.nrows(axis); ++t) {
    auto at = [&](int i) {
      return axis == 0 ? phi[g.cell_index(i, t)] : phi[g.cell_index(t, i)];
    };
    for (int i = 0; i < na; ++i) {
      const int c = axis == 0 ? g.cell_index(i, t) : g.cell_index(t, i);
      if (i == 0) {
        d1[c] = (at(1) - at(0)) / dx;
        d2[c] += (at(0) - 2.0 * at(1) + at(2)) / (dx * dx);
      } else if (i == na - 1) {
        d1[c] = (at(na - 1) - at(na - 2)) / dx;
        d2[c] += (at(na - 3) - 2.0 * at(na - 2) + at(na - 1)) / (dx * dx);
      } else {
        d1[c] = (at(i + 1) - at(i - 1)) / (2.0 * dx);
        d2[c] += (at(i - 1) - 2.0 * at(i) + at(i + 1)) / (dx * dx);
      }
    }
  }
}

PotentialField build(const Grid& g, ScalarField phi, bool bounded) {
  for (double v : phi)
    if (!std::isfinite(v))
      throw std::invalid_argument(
          "PotentialField: potential sample is not finite");

  PotentialField pot;
  pot.grid = g;
  pot.bounded_domain = bounded;
  const double mn = *std::min_element(phi.begin(), phi.end());
  pot.normalization_shift = mn;
  for (double& v : phi) v -= mn;
  pot.phi = std::move(phi);

  pot.dphi = FaceArrays(g);
  for (int a = 0; a < g.dim; ++a)
    for (int t = 0; t < g.nrows(a); ++t)
      for (int f = 1; f < g.n[a]; ++f) {
        const int L = g.face_left_cell(a, f, t);
        const int R = g.face_right_cell(a, f, t);
        pot.dphi.axis[a][g.face_index(a, f, t)] =
            (pot.phi[R] - pot.phi[L]) / g.dx[a];
      }

  pot.grad = VectorField(g);
  pot.lap.assign(g.ncells(), 0.0);
  for (int a = 0; a < g.dim; ++a)
    cell_derivatives(g, pot.phi, a, pot.grad.comp[a], pot.lap);
  return pot;
}

}  // namespace

PotentialField PotentialField::from_callable(
    const Grid& g, const std::function<double(double, double)>& f,
    bool bounded) {
  ScalarField phi(g.ncells());
  for (int c = 0; c < g.ncells(); ++c) {
    auto x = g.cell_center(c);
    phi[c] = f(x[0], x[1]);
  }
  return build(g, std::move(phi), bounded);
}

PotentialField PotentialField::from_samples(const Grid& g, ScalarField values,
                                            bool bounded) {
  if (static_cast<int>(values.size()) != g.ncells())
    throw std::invalid_argument(
        "PotentialField: sample count does not match the grid");
  return build(g, std::move(values), bounded);
}

}  // namespace nss
