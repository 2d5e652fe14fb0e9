#include "nss/spatial.hpp"

#include <cmath>

namespace nss {

double bernoulli(double z) {
  const double az = std::abs(z);
  if (az < 1e-5) {
    // z/(e^z - 1) = 1 - z/2 + z^2/12 - z^4/720 + ...
    return 1.0 - 0.5 * z + z * z / 12.0;
  }
  if (z > 700.0) return 0.0;  // e^z overflows; the limit is 0
  return z / std::expm1(z);
}

FaceArrays face_velocities(const Grid& g, const VectorField& u) {
  FaceArrays uf(g);
  for (int a = 0; a < g.dim; ++a)
    for (int t = 0; t < g.nrows(a); ++t)
      for (int f = 1; f < g.n[a]; ++f) {
        const int L = g.face_left_cell(a, f, t);
        const int R = g.face_right_cell(a, f, t);
        uf.axis[a][g.face_index(a, f, t)] =
            0.5 * (u.comp[a][L] + u.comp[a][R]);
      }
  return uf;
}

FaceArrays convective_flux_rho(const Grid& g, const ScalarField& rho,
                               const FaceArrays& ufaces) {
  FaceArrays flux(g);
  for (int a = 0; a < g.dim; ++a)
    for (int t = 0; t < g.nrows(a); ++t)
      for (int f = 1; f < g.n[a]; ++f) {
        const int idx = g.face_index(a, f, t);
        const double ub = ufaces.axis[a][idx];
        flux.axis[a][idx] = ub * upwind(ub, rho[g.face_left_cell(a, f, t)],
                                        rho[g.face_right_cell(a, f, t)]);
      }
  return flux;
}

FaceArrays particle_flux(const Grid& g, const ScalarField& eta,
                         const PotentialField& pot, const FaceArrays& ufaces) {
  FaceArrays flux(g);
  for (int a = 0; a < g.dim; ++a) {
    const double dx = g.dx[a];
    for (int t = 0; t < g.nrows(a); ++t)
      for (int f = 1; f < g.n[a]; ++f) {
        const int idx = g.face_index(a, f, t);
        const double eL = eta[g.face_left_cell(a, f, t)];
        const double eR = eta[g.face_right_cell(a, f, t)];
        const double w = pot.dphi.axis[a][idx] * dx;  // potential jump
        const double ub = ufaces.axis[a][idx];
        flux.axis[a][idx] =
            (bernoulli(w) * eL - bernoulli(-w) * eR) / dx +
            ub * upwind(ub, eL, eR);
      }
  }
  return flux;
}

ScalarField flux_divergence(const Grid& g, const FaceArrays& fluxes) {
  ScalarField div(g.ncells(), 0.0);
  for (int a = 0; a < g.dim; ++a) {
    const double inv = 1.0 / g.dx[a];
    for (int t = 0; t < g.nrows(a); ++t)
      for (int i = 0; i < g.n[a]; ++i) {
        const int c = a == 0 ? g.cell_index(i, t) : g.cell_index(t, i);
        div[c] += (fluxes.axis[a][g.face_index(a, i + 1, t)] -
                   fluxes.axis[a][g.face_index(a, i, t)]) *
                  inv;
      }
  }
  return div;
}

ScalarField face_average_divergence(const Grid& g, const VectorField& u) {
  return flux_divergence(g, face_velocities(g, u));
}

namespace {

// Face-normal gradient of one component with no-slip walls: interior faces
// difference the neighbors, wall faces see the zero wall value half a cell
// away.
void laplacian_no_slip(const Grid& g, const ScalarField& f, ScalarField& out,
                       double coef) {
  for (int a = 0; a < g.dim; ++a) {
    const double dx = g.dx[a];
    for (int t = 0; t < g.nrows(a); ++t) {
      const int na = g.n[a];
      auto cell = [&](int i) {
        return a == 0 ? g.cell_index(i, t) : g.cell_index(t, i);
      };
      double gprev = 2.0 * f[cell(0)] / dx;  // wall face f = 0
      for (int i = 0; i < na; ++i) {
        const double gnext = i + 1 < na
                                 ? (f[cell(i + 1)] - f[cell(i)]) / dx
                                 : -2.0 * f[cell(na - 1)] / dx;
        out[cell(i)] += coef * (gnext - gprev) / dx;
        gprev = gnext;
      }
    }
  }
}

// (D^T d) for the face-average divergence D; the grad-div viscous term is
// -lambda D^T D u, which keeps the bilinear form symmetric by construction.
void div_transpose(const Grid& g, const ScalarField& d, VectorField& out,
                   double coef) {
  for (int a = 0; a < g.dim; ++a) {
    const double half = 0.5 / g.dx[a];
    for (int t = 0; t < g.nrows(a); ++t) {
      const int na = g.n[a];
      auto cell = [&](int i) {
        return a == 0 ? g.cell_index(i, t) : g.cell_index(t, i);
      };
      for (int i = 0; i < na; ++i) {
        double v = 0.0;
        if (i + 1 < na) v += (d[cell(i)] - d[cell(i + 1)]) * half;
        if (i > 0) v += (d[cell(i - 1)] - d[cell(i)]) * half;
        out.comp[a][cell(i)] += coef * v;
      }
    }
  }
}

}  // namespace

VectorField viscous_operator(const Grid& g, const VectorField& u, double mu,
                             double lambda) {
  VectorField out(g);
  for (int b = 0; b < g.dim; ++b) laplacian_no_slip(g, u.comp[b], out.comp[b], mu);
  if (lambda != 0.0) {
    const ScalarField d = face_average_divergence(g, u);
    div_transpose(g, d, out, -lambda);
  }
  return out;
}

FaceArrays pressure_force_faces(const Grid& g, const ScalarField& rho,
                                const ScalarField& eta,
                                const PotentialField& pot,
                                const PhysParams& p,
                                const FaceArrays& ufaces) {
  FaceArrays force(g);
  for (int a = 0; a < g.dim; ++a) {
    const double dx = g.dx[a];
    for (int t = 0; t < g.nrows(a); ++t)
      for (int f = 1; f < g.n[a]; ++f) {
        const int idx = g.face_index(a, f, t);
        const int L = g.face_left_cell(a, f, t);
        const int R = g.face_right_cell(a, f, t);
        const double ub = ufaces.axis[a][idx];
        const double dphi = pot.phi[R] - pot.phi[L];

        const double rho_up = upwind(ub, rho[L], rho[R]);
        const double dq = pressure_potential_prime(rho[R], p) -
                          pressure_potential_prime(rho[L], p) +
                          p.beta * dphi;
        double fval = -rho_up * dq / dx;

        // eta contribution: -eta_up d(Phi + log eta)/dx, which vanishes on
        // eta ~ e^{-Phi}. Falls back to the plain split form next to eta
        // vacuum where the log is unusable.
        if (eta[L] > kEntropyFloor && eta[R] > kEntropyFloor) {
          const double s = dphi + std::log(eta[R]) - std::log(eta[L]);
          fval -= upwind(ub, eta[L], eta[R]) * s / dx;
        } else {
          fval -= (eta[R] - eta[L]) / dx +
                  0.5 * (eta[L] + eta[R]) * dphi / dx;
        }
        force.axis[a][idx] = fval;
      }
  }
  return force;
}

VectorField faces_to_cells(const Grid& g, const FaceArrays& f) {
  VectorField out(g);
  for (int a = 0; a < g.dim; ++a)
    for (int t = 0; t < g.nrows(a); ++t)
      for (int i = 0; i < g.n[a]; ++i) {
        const int c = a == 0 ? g.cell_index(i, t) : g.cell_index(t, i);
        out.comp[a][c] = 0.5 * (f.axis[a][g.face_index(a, i, t)] +
                                f.axis[a][g.face_index(a, i + 1, t)]);
      }
  return out;
}

SemiDiscreteRhs assemble_semidiscrete_rhs(const SimState& s,
                                          const PotentialField& pot,
                                          const PhysParams& p) {
  const Grid& g = s.grid;
  const VectorField u = velocity(s);
  const FaceArrays uf = face_velocities(g, u);
  const FaceArrays massflux = convective_flux_rho(g, s.rho, uf);

  SemiDiscreteRhs rhs;
  rhs.rho = flux_divergence(g, massflux);
  for (double& v : rhs.rho) v = -v;

  const FaceArrays pflux = particle_flux(g, s.eta, pot, uf);
  rhs.eta = flux_divergence(g, pflux);
  for (double& v : rhs.eta) v = -v;

  rhs.mom = viscous_operator(g, u, p.mu, p.lambda);
  const VectorField force =
      faces_to_cells(g, pressure_force_faces(g, s.rho, s.eta, pot, p, uf));
  for (int b = 0; b < g.dim; ++b) {
    // donor-cell momentum flux: mass flux times upwind velocity component
    FaceArrays mflux(g);
    for (int a = 0; a < g.dim; ++a)
      for (int t = 0; t < g.nrows(a); ++t)
        for (int f = 1; f < g.n[a]; ++f) {
          const int idx = g.face_index(a, f, t);
          const double ub = uf.axis[a][idx];
          mflux.axis[a][idx] =
              massflux.axis[a][idx] *
              upwind(ub, u.comp[b][g.face_left_cell(a, f, t)],
                     u.comp[b][g.face_right_cell(a, f, t)]);
        }
    const ScalarField divm = flux_divergence(g, mflux);
    for (int c = 0; c < g.ncells(); ++c)
      rhs.mom.comp[b][c] += -divm[c] + force.comp[b][c];
  }
  return rhs;
}

}  // namespace nss
