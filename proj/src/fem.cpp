#include "thermo/fem.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "thermo/errors.hpp"

namespace thermo {
namespace {

constexpr double kMmToM = 1e-3;

using Grad = std::array<std::array<double, 3>, 4>;

// Shape-function gradients of a linear tet (per unit of the coordinates) and
// its volume.
Grad shape_gradients(const TetMesh& mesh, std::size_t t, double scale, double& volume) {
  const auto& e = mesh.tets[t];
  const auto& p0 = mesh.nodes[e[0]];
  double j[3][3];
  for (int c = 0; c < 3; ++c) {
    for (int a = 0; a < 3; ++a) j[a][c] = (mesh.nodes[e[c + 1]][a] - p0[a]) * scale;
  }
  const double det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1]) -
                     j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0]) +
                     j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
  volume = det / 6.0;
  // Rows of inv(J) are the gradients of N1..N3.
  double inv[3][3];
  inv[0][0] = (j[1][1] * j[2][2] - j[1][2] * j[2][1]) / det;
  inv[0][1] = (j[0][2] * j[2][1] - j[0][1] * j[2][2]) / det;
  inv[0][2] = (j[0][1] * j[1][2] - j[0][2] * j[1][1]) / det;
  inv[1][0] = (j[1][2] * j[2][0] - j[1][0] * j[2][2]) / det;
  inv[1][1] = (j[0][0] * j[2][2] - j[0][2] * j[2][0]) / det;
  inv[1][2] = (j[0][2] * j[1][0] - j[0][0] * j[1][2]) / det;
  inv[2][0] = (j[1][0] * j[2][1] - j[1][1] * j[2][0]) / det;
  inv[2][1] = (j[0][1] * j[2][0] - j[0][0] * j[2][1]) / det;
  inv[2][2] = (j[0][0] * j[1][1] - j[0][1] * j[1][0]) / det;
  Grad g{};
  for (int a = 0; a < 3; ++a) {
    g[1][a] = inv[0][a];
    g[2][a] = inv[1][a];
    g[3][a] = inv[2][a];
    g[0][a] = -(g[1][a] + g[2][a] + g[3][a]);
  }
  return g;
}

double triangle_area(const TetMesh& mesh, const BoundaryFace& f, double scale) {
  const auto& a = mesh.nodes[f.nodes[0]];
  const auto& b = mesh.nodes[f.nodes[1]];
  const auto& c = mesh.nodes[f.nodes[2]];
  const double u[3] = {(b[0] - a[0]) * scale, (b[1] - a[1]) * scale, (b[2] - a[2]) * scale};
  const double v[3] = {(c[0] - a[0]) * scale, (c[1] - a[1]) * scale, (c[2] - a[2]) * scale};
  const double n[3] = {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
  return 0.5 * std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
}

std::vector<char> nodes_on(const TetMesh& mesh, FaceTag tag) {
  std::vector<char> mark(mesh.node_count(), 0);
  for (const auto& f : mesh.faces) {
    if (f.tag == tag) {
      for (auto n : f.nodes) mark[n] = 1;
    }
  }
  return mark;
}

void require_valid(const TetMesh& mesh) {
  if (mesh.tets.empty() || mesh.nodes.empty()) throw ParameterError("mesh is empty");
  if (mesh.material.size() != mesh.tets.size() || mesh.tumor_fraction.size() != mesh.tets.size()) {
    throw ParameterError("mesh per-element arrays do not match the element count");
  }
}

}  // namespace

double HeatBalance::relative_imbalance() const {
  const double out = top_outflow + bottom_outflow;
  const double scale = std::max(std::abs(generated), std::abs(out));
  return scale == 0.0 ? 0.0 : std::abs(generated - out) / scale;
}

HeatSolution solve_heat(const TetMesh& mesh, const ThermalParams& p, const SolverOptions& options) {
  require_valid(mesh);
  if (!(p.k_tissue > 0.0) || !(p.k_tumor > 0.0)) throw ParameterError("conductivities must be positive");
  if (!(p.h_top >= 0.0)) throw ParameterError("convection coefficient must be non-negative");

  const std::size_t nn = mesh.node_count();
  const std::vector<char> fixed = nodes_on(mesh, FaceTag::Bottom);
  const bool has_dirichlet = std::any_of(fixed.begin(), fixed.end(), [](char c) { return c != 0; });
  if (!has_dirichlet && p.h_top == 0.0) {
    throw SingularSystemError("no Dirichlet nodes and zero convection: temperature is undetermined");
  }

  std::vector<std::int32_t> dof(nn, -1);
  std::int32_t free_count = 0;
  for (std::size_t i = 0; i < nn; ++i) {
    if (!fixed[i]) dof[i] = free_count++;
  }

  std::vector<std::int32_t> element_dofs;
  element_dofs.reserve(mesh.tet_count() * 4);
  for (const auto& e : mesh.tets) {
    for (auto n : e) element_dofs.push_back(dof[n]);
  }
  CsrMatrix k = CsrMatrix::from_elements(free_count, element_dofs, 4);
  std::vector<double> rhs(free_count, 0.0);

  std::vector<double> source(nn, 0.0);  // W per node
  std::vector<Grad> grads(mesh.tet_count());
  std::vector<double> cond(mesh.tet_count());
  std::vector<double> vols(mesh.tet_count());
  HeatSolution sol;

  for (std::size_t t = 0; t < mesh.tet_count(); ++t) {
    double vol = 0.0;
    grads[t] = shape_gradients(mesh, t, kMmToM, vol);
    vols[t] = vol;
    const double frac = mesh.tumor_fraction[t];
    cond[t] = p.k_tissue + (p.k_tumor - p.k_tissue) * frac;
    const double q = p.q_tumor * frac;
    sol.balance.generated += q * vol;
    const auto& e = mesh.tets[t];
    for (int a = 0; a < 4; ++a) source[e[a]] += q * vol / 4.0;
    for (int a = 0; a < 4; ++a) {
      const auto ra = dof[e[a]];
      if (ra < 0) continue;
      for (int b = 0; b < 4; ++b) {
        const double kab = cond[t] * vol *
                           (grads[t][a][0] * grads[t][b][0] + grads[t][a][1] * grads[t][b][1] +
                            grads[t][a][2] * grads[t][b][2]);
        const auto cb = dof[e[b]];
        if (cb >= 0) {
          k.add(ra, cb, kab);
        } else {
          rhs[ra] -= kab * p.t_bottom;
        }
      }
    }
  }
  for (std::size_t i = 0; i < nn; ++i) {
    if (dof[i] >= 0) rhs[dof[i]] += source[i];
  }

  if (p.h_top > 0.0) {
    for (const auto& f : mesh.faces) {
      if (f.tag != FaceTag::Top) continue;
      const double area = triangle_area(mesh, f, kMmToM);
      for (int a = 0; a < 3; ++a) {
        const auto ra = dof[f.nodes[a]];
        if (ra < 0) continue;
        rhs[ra] += p.h_top * p.t_ambient * area / 3.0;
        for (int b = 0; b < 3; ++b) {
          const double m = p.h_top * area / 12.0 * (a == b ? 2.0 : 1.0);
          const auto cb = dof[f.nodes[b]];
          if (cb >= 0) {
            k.add(ra, cb, m);
          } else {
            rhs[ra] -= m * p.t_bottom;
          }
        }
      }
    }
  }

  // Warm start from the bottom temperature.
  std::vector<double> x(free_count, p.t_bottom);
  sol.stats = pcg_solve(k, rhs, x, options);

  sol.temperature.values.assign(nn, p.t_bottom);
  for (std::size_t i = 0; i < nn; ++i) {
    if (dof[i] >= 0) sol.temperature.values[i] = x[dof[i]];
  }
  const auto& temp = sol.temperature.values;

  // Top outflow: exact integral of h (T - T_amb) for linear T.
  for (const auto& f : mesh.faces) {
    if (f.tag != FaceTag::Top) continue;
    const double area = triangle_area(mesh, f, kMmToM);
    const double mean = (temp[f.nodes[0]] + temp[f.nodes[1]] + temp[f.nodes[2]]) / 3.0;
    sol.balance.top_outflow += p.h_top * area * (mean - p.t_ambient);
  }
  // Bottom outflow: heat the fixed nodes must absorb, i.e. the source there
  // minus the conduction operator's nodal balance.
  std::vector<double> reaction(nn, 0.0);
  for (std::size_t t = 0; t < mesh.tet_count(); ++t) {
    const auto& e = mesh.tets[t];
    for (int a = 0; a < 4; ++a) {
      if (!fixed[e[a]]) continue;
      double flux = 0.0;
      for (int b = 0; b < 4; ++b) {
        flux += cond[t] * vols[t] *
                (grads[t][a][0] * grads[t][b][0] + grads[t][a][1] * grads[t][b][1] +
                 grads[t][a][2] * grads[t][b][2]) *
                temp[e[b]];
      }
      reaction[e[a]] += flux;
    }
  }
  for (std::size_t i = 0; i < nn; ++i) {
    if (fixed[i]) sol.balance.bottom_outflow += source[i] - reaction[i];
  }
  return sol;
}

ElasticSolution solve_elastic(const TetMesh& mesh, const ElasticParams& p, const SolverOptions& options) {
  require_valid(mesh);
  if (!(p.e_tissue > 0.0)) throw ParameterError("Young's modulus must be positive");
  if (!(p.poisson >= 0.0 && p.poisson < 0.5)) throw ParameterError("Poisson ratio must lie in [0, 0.5)");
  if (!(p.applied_strain >= 0.0 && p.applied_strain <= 0.2)) {
    throw ParameterError("applied strain must lie in [0, 0.2]");
  }
  if (!(p.tumor_stiffness_factor > 0.0)) throw ParameterError("tumor stiffness factor must be positive");

  const std::size_t nn = mesh.node_count();
  const std::vector<char> bottom = nodes_on(mesh, FaceTag::Bottom);
  const std::vector<char> top = nodes_on(mesh, FaceTag::Top);
  const double top_uz = -p.applied_strain * mesh.dims.z_len;

  // Prescribed values per dof; dof index -1 means constrained.
  std::vector<std::int32_t> dof(3 * nn, -1);
  std::vector<double> prescribed(3 * nn, 0.0);
  std::int32_t free_count = 0;
  for (std::size_t i = 0; i < nn; ++i) {
    for (int c = 0; c < 3; ++c) {
      const std::size_t d = 3 * i + c;
      if (bottom[i]) continue;
      if (top[i] && c == 2) {
        prescribed[d] = top_uz;
        continue;
      }
      dof[d] = free_count++;
    }
  }

  std::vector<std::int32_t> element_dofs;
  element_dofs.reserve(mesh.tet_count() * 12);
  for (const auto& e : mesh.tets) {
    for (auto n : e) {
      for (int c = 0; c < 3; ++c) element_dofs.push_back(dof[3 * n + c]);
    }
  }
  CsrMatrix k = CsrMatrix::from_elements(free_count, element_dofs, 12);
  std::vector<double> rhs(free_count, 0.0);

  const double nu = p.poisson;
  for (std::size_t t = 0; t < mesh.tet_count(); ++t) {
    double vol = 0.0;
    const Grad g = shape_gradients(mesh, t, 1.0, vol);
    const double young = p.e_tissue * (1.0 + (p.tumor_stiffness_factor - 1.0) * mesh.tumor_fraction[t]);
    const double lambda = young * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    const double mu = young / (2.0 * (1.0 + nu));
    // K_ab(i,j) = V (lambda g_a,i g_b,j + mu g_a,j g_b,i + mu delta_ij g_a . g_b)
    const auto& e = mesh.tets[t];
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        const double gg = g[a][0] * g[b][0] + g[a][1] * g[b][1] + g[a][2] * g[b][2];
        for (int i = 0; i < 3; ++i) {
          const auto r = dof[3 * e[a] + i];
          if (r < 0) continue;
          for (int j = 0; j < 3; ++j) {
            double kij = lambda * g[a][i] * g[b][j] + mu * g[a][j] * g[b][i];
            if (i == j) kij += mu * gg;
            kij *= vol;
            const std::size_t col_global = 3 * e[b] + j;
            const auto c = dof[col_global];
            if (c >= 0) {
              k.add(r, c, kij);
            } else if (prescribed[col_global] != 0.0) {
              rhs[r] -= kij * prescribed[col_global];
            }
          }
        }
      }
    }
  }

  // Initial guess: the uniform compression u_z = -strain * z.
  std::vector<double> x(free_count, 0.0);
  for (std::size_t i = 0; i < nn; ++i) {
    const auto d = dof[3 * i + 2];
    if (d >= 0) x[d] = -p.applied_strain * mesh.nodes[i][2];
  }
  ElasticSolution sol;
  sol.stats = pcg_solve(k, rhs, x, options);
  sol.displacement.values.assign(nn, {0.0, 0.0, 0.0});
  for (std::size_t i = 0; i < nn; ++i) {
    for (int c = 0; c < 3; ++c) {
      const auto d = dof[3 * i + c];
      sol.displacement.values[i][c] = d >= 0 ? x[d] : prescribed[3 * i + c];
    }
  }
  return sol;
}

TetMesh deform_mesh(const TetMesh& mesh, const VectorField& u) {
  if (u.values.size() != mesh.node_count()) throw ParameterError("displacement field size does not match the mesh");
  TetMesh out = mesh;
  for (std::size_t i = 0; i < out.nodes.size(); ++i) {
    for (int a = 0; a < 3; ++a) out.nodes[i][a] += u.values[i][a];
  }
  for (std::size_t t = 0; t < out.tet_count(); ++t) {
    if (!(tet_volume(out, t) > 0.0)) {
      std::ostringstream msg;
      msg << "element " << t << " inverted by the deformation";
      throw DeformationError(msg.str());
    }
  }
  return out;
}

double sample_field(const TetMesh& mesh, const PointLocator& locator, const ScalarField& field, const Point3& p) {
  const auto loc = locator.locate(p);
  if (!loc) return std::numeric_limits<double>::quiet_NaN();
  const auto& e = mesh.tets[loc->tet];
  double v = 0.0;
  for (int a = 0; a < 4; ++a) v += loc->weights[a] * field.values[e[a]];
  return v;
}

SliceGrid surface_slice(const TetMesh& mesh, const ScalarField& field, const SlicePlane& plane, std::size_t nu,
                        std::size_t nv) {
  if (field.values.size() != mesh.node_count()) throw ParameterError("field size does not match the mesh");
  if (nu < 2 || nv < 2) throw ParameterError("slice grid needs at least 2 x 2 points");
  std::array<double, 3> lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity()};
  std::array<double, 3> hi{-lo[0], -lo[1], -lo[2]};
  for (const auto& n : mesh.nodes) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], n[a]);
      hi[a] = std::max(hi[a], n[a]);
    }
  }
  const int axis = static_cast<int>(plane.axis);
  if (plane.offset < lo[axis] || plane.offset > hi[axis]) {
    std::ostringstream msg;
    msg << "slice plane offset " << plane.offset << " outside block range [" << lo[axis] << ", " << hi[axis] << "]";
    throw ParameterError(msg.str());
  }
  SliceGrid grid;
  grid.plane = plane;
  const int ua = axis == 0 ? 1 : 0;
  const int va = axis == 2 ? 1 : 2;
  grid.u_axis = static_cast<Axis>(ua);
  grid.v_axis = static_cast<Axis>(va);
  for (std::size_t i = 0; i < nu; ++i) grid.u.push_back(lo[ua] + (hi[ua] - lo[ua]) * i / (nu - 1));
  for (std::size_t j = 0; j < nv; ++j) grid.v.push_back(lo[va] + (hi[va] - lo[va]) * j / (nv - 1));
  const PointLocator locator(mesh);
  grid.values.resize(nu * nv);
  for (std::size_t j = 0; j < nv; ++j) {
    for (std::size_t i = 0; i < nu; ++i) {
      Point3 p{};
      p[axis] = plane.offset;
      p[ua] = grid.u[i];
      p[va] = grid.v[j];
      grid.values[j * nu + i] = sample_field(mesh, locator, field, p);
    }
  }
  return grid;
}

void write_field_csv(std::ostream& out, const TetMesh& mesh, const ScalarField& field) {
  out << "node_index,x_mm,y_mm,z_mm,T_celsius\n";
  char buf[160];
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    const auto& p = mesh.nodes[i];
    std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g,%.10g,%.12g\n", i, p[0], p[1], p[2], field.values[i]);
    out << buf;
  }
}

void write_slice_csv(std::ostream& out, const SliceGrid& slice) {
  static constexpr const char* kNames[] = {"x_mm", "y_mm", "z_mm"};
  out << kNames[static_cast<int>(slice.u_axis)] << ',' << kNames[static_cast<int>(slice.v_axis)] << ",T_celsius\n";
  char buf[128];
  for (std::size_t j = 0; j < slice.v.size(); ++j) {
    for (std::size_t i = 0; i < slice.u.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.12g\n", slice.u[i], slice.v[j], slice.at(i, j));
      out << buf;
    }
  }
}

}  // namespace thermo
