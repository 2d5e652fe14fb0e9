#include "nss/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nss {

Grid::Grid(int dim_, std::array<int, 2> cells, std::array<double, 2> lo_,
           std::array<double, 2> hi_)
    : dim(dim_), n(cells), lo(lo_), hi(hi_) {
  if (dim != 1 && dim != 2)
    throw std::invalid_argument("Grid: dim must be 1 or 2, got " +
                                std::to_string(dim));
  if (dim == 1) n[1] = 1;
  for (int a = 0; a < dim; ++a) {
    if (n[a] < 4)
      throw std::invalid_argument("Grid: axis " + std::to_string(a) +
                                  " needs at least 4 cells, got " +
                                  std::to_string(n[a]));
    if (!(hi[a] > lo[a]))
      throw std::invalid_argument("Grid: axis " + std::to_string(a) +
                                  " extent must be positive");
    dx[a] = (hi[a] - lo[a]) / n[a];
  }
  if (dim == 1) {
    lo[1] = 0.0;
    hi[1] = 1.0;
    dx[1] = 1.0;
  }
}

Grid Grid::line(double lo, double hi, int nx) {
  return Grid(1, {nx, 1}, {lo, 0.0}, {hi, 1.0});
}

Grid Grid::box(double xlo, double xhi, int nx, double ylo, double yhi,
               int ny) {
  return Grid(2, {nx, ny}, {xlo, ylo}, {xhi, yhi});
}

double Grid::center_radius(int idx) const {
  auto x = cell_center(idx);
  return dim == 1 ? std::abs(x[0]) : std::hypot(x[0], x[1]);
}

double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

double max_abs(const VectorField& f) {
  double m = max_abs(f.comp[0]);
  if (f.dim == 2) m = std::max(m, max_abs(f.comp[1]));
  return m;
}

double l2_norm(const Grid& g, const ScalarField& f) {
  double s = 0.0;
  for (double v : f) s += v * v;
  return std::sqrt(s * g.cell_volume());
}

double l2_norm(const Grid& g, const VectorField& f) {
  double s = 0.0;
  for (int a = 0; a < f.dim; ++a)
    for (double v : f.comp[a]) s += v * v;
  return std::sqrt(s * g.cell_volume());
}

}  // namespace nss
