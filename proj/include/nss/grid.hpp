#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace nss {

/// Uniform cell-centered box grid in one or two space dimensions.
///
/// Cells are stored row-major with the x index fastest. Faces are addressed
/// per axis: an axis-a face layer has n[a]+1 faces along a for every row of
/// cells across, so in 2d there are (nx+1)*ny x-faces and nx*(ny+1) y-faces.
/// Face f of a 1d row separates cells f-1 and f; f == 0 and f == n[a] are
/// boundary faces (domain wall).
struct Grid {
  int dim = 1;
  std::array<int, 2> n{1, 1};        // cells per axis; n[1] == 1 when dim == 1
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};
  std::array<double, 2> dx{1.0, 1.0};

  Grid() = default;
  Grid(int dim_, std::array<int, 2> cells, std::array<double, 2> lo_,
       std::array<double, 2> hi_);

  static Grid line(double lo, double hi, int nx);
  static Grid box(double xlo, double xhi, int nx, double ylo, double yhi,
                  int ny);

  int ncells() const { return n[0] * n[1]; }
  double cell_volume() const { return dim == 1 ? dx[0] : dx[0] * dx[1]; }
  double domain_volume() const { return cell_volume() * ncells(); }

  int cell_index(int i, int j = 0) const { return j * n[0] + i; }
  std::array<int, 2> cell_coords(int idx) const {
    return {idx % n[0], idx / n[0]};
  }
  double center(int axis, int i) const {
    return lo[axis] + (i + 0.5) * dx[axis];
  }
  std::array<double, 2> cell_center(int idx) const {
    auto c = cell_coords(idx);
    return {center(0, c[0]), dim == 2 ? center(1, c[1]) : 0.0};
  }
  /// Euclidean distance of a cell center from the coordinate origin.
  double center_radius(int idx) const;

  /// Number of transverse rows for axis-a faces (1 in 1d).
  int nrows(int axis) const { return dim == 2 ? n[1 - axis] : 1; }
  /// Total axis-a faces, boundary faces included.
  int nfaces(int axis) const { return (n[axis] + 1) * nrows(axis); }
  /// Flat index of face f in transverse row t, for the given axis.
  int face_index(int axis, int f, int t = 0) const {
    return t * (n[axis] + 1) + f;
  }
  bool face_is_boundary(int axis, int f) const {
    return f == 0 || f == n[axis];
  }
  /// Cell left of face (f,t) along the axis; only valid for f >= 1.
  int face_left_cell(int axis, int f, int t) const {
    return axis == 0 ? cell_index(f - 1, t) : cell_index(t, f - 1);
  }
  /// Cell right of face (f,t) along the axis; only valid for f <= n[axis]-1.
  int face_right_cell(int axis, int f, int t) const {
    return axis == 0 ? cell_index(f, t) : cell_index(t, f);
  }
};

/// Cell-centered scalar field, indexed like Grid cells.
using ScalarField = std::vector<double>;

/// Cell-centered vector field with one component array per axis.
/// comp[1] stays empty in 1d.
struct VectorField {
  int dim = 1;
  std::array<ScalarField, 2> comp;

  VectorField() = default;
  explicit VectorField(const Grid& g)
      : dim(g.dim) {
    comp[0].assign(g.ncells(), 0.0);
    if (dim == 2) comp[1].assign(g.ncells(), 0.0);
  }
};

/// Per-axis face arrays (one value per face, normal component).
struct FaceArrays {
  std::array<std::vector<double>, 2> axis;

  explicit FaceArrays(const Grid& g) {
    axis[0].assign(g.nfaces(0), 0.0);
    if (g.dim == 2) axis[1].assign(g.nfaces(1), 0.0);
  }
  FaceArrays() = default;
};

double max_abs(const ScalarField& f);
double max_abs(const VectorField& f);
double l2_norm(const Grid& g, const ScalarField& f);
double l2_norm(const Grid& g, const VectorField& f);

}  // namespace nss
