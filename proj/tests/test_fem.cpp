#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "support.hpp"
#include "thermo/errors.hpp"
#include "thermo/fem.hpp"
#include "thermo/signature.hpp"

#include <Eigen/Dense>

using namespace thermo;

namespace {

RefinementSpec level(int nx, int ny, int nz) {
  RefinementSpec r;
  r.nx = nx;
  r.ny = ny;
  r.nz = nz;
  Box3 b;
  b.lo[0] = 60 - 22.6, b.hi[0] = 60 + 22.6;
  b.lo[1] = 30 - 22.6, b.hi[1] = 30 + 22.6;
  b.lo[2] = 0, b.hi[2] = 18;
  r.box = b;
  return r;
}

TetMesh model_mesh(int n, ShapeFamily f = ShapeFamily::RegularPolygon, RefinementSpec r = level(8, 4, 3)) {
  TumorShape s;
  s.family = f;
  s.n = n;
  return build_mesh(place_prism(s, TissueDims{}), r);
}

SolverOptions tight() {
  SolverOptions o;
  o.rel_tol = 1e-12;
  return o;
}

std::set<std::int32_t> boundary_nodes(const TetMesh& m) {
  std::set<std::int32_t> s;
  for (const auto& f : m.faces) s.insert(f.nodes.begin(), f.nodes.end());
  return s;
}

// Integral of div u over the mesh, from per-element constant gradients.
// With `exact` set, sums det(I + grad u) * volume instead: the deformed volume.
double divergence_integral(const TetMesh& m, const VectorField& u, bool exact = false) {
  double total = 0.0;
  for (const auto& t : m.tets) {
    Eigen::Matrix3d j, du;
    for (int c = 0; c < 3; ++c) {
      for (int a = 0; a < 3; ++a) {
        j(a, c) = m.nodes[t[c + 1]][a] - m.nodes[t[0]][a];
        du(a, c) = u.values[t[c + 1]][a] - u.values[t[0]][a];
      }
    }
    const double vol = std::abs(j.determinant()) / 6.0;
    const Eigen::Matrix3d g = du * j.inverse();
    total += (exact ? (Eigen::Matrix3d::Identity() + g).determinant() : g.trace()) * vol;
  }
  return total;
}

}  // namespace

TEST_SUITE("fem") {

TEST_CASE("no source and no convection gives the bottom temperature everywhere") {
  ThermalParams p;
  p.q_tumor = 0.0;
  p.h_top = 0.0;
  const auto sol = solve_heat(model_mesh(5), p, tight());
  for (double t : sol.temperature.values) CHECK(t == doctest::Approx(p.t_bottom).epsilon(1e-12));
}

TEST_CASE("missing Dirichlet set with zero convection is singular") {
  TetMesh m = model_mesh(5);
  m.faces.erase(std::remove_if(m.faces.begin(), m.faces.end(),
                               [](const BoundaryFace& f) { return f.tag == FaceTag::Bottom; }),
                m.faces.end());
  ThermalParams p;
  p.h_top = 0.0;
  CHECK_THROWS_AS(solve_heat(m, p), SingularSystemError);
}

TEST_CASE("slab surrogate converges to the analytic profile") {
  ThermalParams p;
  double prev = 1e9;
  for (const auto& l : testing::kSlabLevels) {
    const double err = testing::slab_error(l[0], l[1], l[2], p);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev <= 0.005);
}

TEST_CASE("maximum principle without a source") {
  ThermalParams p;
  p.q_tumor = 0.0;
  p.k_tumor = 3.0;
  p.t_ambient = 15.0;
  const TetMesh m = model_mesh(6);
  const auto sol = solve_heat(m, p, tight());
  const auto bnd = boundary_nodes(m);
  double lo = 1e300, hi = -1e300;
  for (auto i : bnd) {
    lo = std::min(lo, sol.temperature.values[i]);
    hi = std::max(hi, sol.temperature.values[i]);
  }
  for (std::size_t i = 0; i < m.node_count(); ++i) {
    CHECK(sol.temperature.values[i] >= lo - 1e-9);
    CHECK(sol.temperature.values[i] <= hi + 1e-9);
  }
}

TEST_CASE("raising the source never lowers a nodal temperature") {
  const TetMesh m = model_mesh(7);
  ThermalParams p;
  const auto a = solve_heat(m, p, tight());
  p.q_tumor *= 2.0;
  const auto b = solve_heat(m, p, tight());
  for (std::size_t i = 0; i < m.node_count(); ++i) {
    CHECK(b.temperature.values[i] >= a.temperature.values[i] - 1e-9);
  }
}

TEST_CASE("energy balance for the default decagon") {
  const TetMesh m = model_mesh(10, ShapeFamily::RegularPolygon, level(18, 8, 5));
  ThermalParams p;
  const auto sol = solve_heat(m, p, tight());
  // generated heat from the analytic prism volume, in W
  CHECK(sol.balance.generated == doctest::Approx(p.q_tumor * 400.0 * 8.0 * 1e-9).epsilon(1e-9));
  CHECK(sol.balance.relative_imbalance() < 0.005);
  CHECK(std::abs(sol.balance.generated - sol.balance.top_outflow - sol.balance.bottom_outflow) <
        0.005 * sol.balance.generated);
}

TEST_CASE("mirror symmetric model gives a mirror symmetric surface profile") {
  for (bool deform : {false, true}) {
    TetMesh m = model_mesh(4, ShapeFamily::RegularPolygon, level(18, 8, 5));
    if (deform) m = deform_mesh(m, solve_elastic(m, ElasticParams{}, tight()).displacement);
    const auto sol = solve_heat(m, ThermalParams{}, tight());
    const auto prof = extract_profile(m, sol.temperature, 121);
    for (std::size_t i = 0; i < prof.temps.size(); ++i) {
      CHECK(prof.temps[i] == doctest::Approx(prof.temps[prof.temps.size() - 1 - i]).epsilon(1e-9));
    }
    const auto mx = max_surface_temp(prof);
    CHECK(std::abs(mx.x - 0.06) <= 0.002);
  }
}

TEST_CASE("elastic: zero strain gives zero displacement") {
  ElasticParams e;
  e.applied_strain = 0.0;
  const auto sol = solve_elastic(model_mesh(5), e, tight());
  for (const auto& u : sol.displacement.values) {
    for (double c : u) CHECK(c == 0.0);
  }
}

TEST_CASE("elastic: uniaxial compression with zero Poisson ratio is linear in z") {
  ElasticParams e;
  e.poisson = 0.0;
  e.tumor_stiffness_factor = 1.0;
  const TetMesh m = model_mesh(5);
  const auto sol = solve_elastic(m, e, tight());
  for (std::size_t i = 0; i < m.node_count(); ++i) {
    const auto& u = sol.displacement.values[i];
    CHECK(u[2] == doctest::Approx(-0.06 * m.nodes[i][2]).epsilon(1e-8).scale(1.0));
    CHECK(std::abs(u[0]) < 1e-8);
    CHECK(std::abs(u[1]) < 1e-8);
  }
}

TEST_CASE("elastic: default compression pushes the top down by 1.5 mm") {
  const TetMesh m = model_mesh(10);
  const auto sol = solve_elastic(m, ElasticParams{}, tight());
  double max_uz = 0.0;
  for (const auto& f : m.faces) {
    if (f.tag != FaceTag::Top) continue;
    for (auto n : f.nodes) CHECK(sol.displacement.values[n][2] == doctest::Approx(-1.5).epsilon(1e-12));
  }
  for (const auto& u : sol.displacement.values) max_uz = std::max(max_uz, std::abs(u[2]));
  CHECK(max_uz == doctest::Approx(1.5).epsilon(1e-12));
  for (const auto& f : m.faces) {
    if (f.tag != FaceTag::Bottom) continue;
    for (auto n : f.nodes) CHECK(sol.displacement.values[n] == std::array<double, 3>{0.0, 0.0, 0.0});
  }
}

TEST_CASE("elastic parameters are validated") {
  ElasticParams e;
  e.poisson = 0.5;
  CHECK_THROWS_AS(solve_elastic(model_mesh(5), e), ParameterError);
  e = ElasticParams{};
  e.applied_strain = 0.3;
  CHECK_THROWS_AS(solve_elastic(model_mesh(5), e), ParameterError);
}

TEST_CASE("deformation: zero field, rigid translation, compression volume") {
  const TetMesh m = model_mesh(6);
  VectorField zero{std::vector<std::array<double, 3>>(m.node_count(), {0.0, 0.0, 0.0})};
  const TetMesh same = deform_mesh(m, zero);
  CHECK(same.nodes == m.nodes);

  VectorField shift{std::vector<std::array<double, 3>>(m.node_count(), {1.5, -2.0, 0.25})};
  const TetMesh moved = deform_mesh(m, shift);
  for (std::size_t t = 0; t < m.tet_count(); t += 13) {
    CHECK(tet_volume(moved, t) == doctest::Approx(tet_volume(m, t)).epsilon(1e-12));
  }

  const auto el = solve_elastic(m, ElasticParams{}, tight());
  const TetMesh squeezed = deform_mesh(m, el.displacement);
  const double v0 = total_volume(m), v1 = total_volume(squeezed);
  CHECK(v1 < v0);
  CHECK(v1 == doctest::Approx(divergence_integral(m, el.displacement, true)).epsilon(1e-12));
  // first-order change is the divergence integral; the rest is quadratic in
  // the 6% strain
  const double div = divergence_integral(m, el.displacement);
  CHECK(div < 0.0);
  CHECK(std::abs((v1 - v0) - div) <= 3.0 * 0.06 * 0.06 * v0);
}

TEST_CASE("inverting displacement is rejected") {
  const TetMesh m = model_mesh(5);
  VectorField u{std::vector<std::array<double, 3>>(m.node_count(), {0.0, 0.0, 0.0})};
  for (std::size_t i = 0; i < m.node_count(); ++i) u.values[i][2] = -2.0 * m.nodes[i][2];  // mirror in z
  CHECK_THROWS_AS(deform_mesh(m, u), DeformationError);
}

TEST_CASE("slices and point samples interpolate the nodal field") {
  const TetMesh m = model_mesh(10, ShapeFamily::RegularPolygon, level(18, 8, 5));
  const auto sol = solve_heat(m, ThermalParams{}, tight());
  const PointLocator loc(m);
  for (std::size_t i = 0; i < m.node_count(); i += 11) {
    CHECK(sample_field(m, loc, sol.temperature, m.nodes[i]) ==
          doctest::Approx(sol.temperature.values[i]).epsilon(1e-12));
  }
  const SliceGrid g = surface_slice(m, sol.temperature, {Axis::Y, 30.0});
  CHECK(g.u.size() == 121);
  CHECK(g.v.size() == 26);
  std::size_t best = 0;
  for (std::size_t k = 0; k < g.values.size(); ++k) {
    if (g.values[k] > g.values[best]) best = k;
  }
  const double bx = g.u[best % g.u.size()], bz = g.v[best / g.u.size()];
  CHECK(std::abs(bx - 60.0) <= circumradius_for_area(10, 400.0));
  CHECK(bz >= 5.0 - 1.0);
  CHECK(bz <= 13.0 + 1.0);

  ScalarField constant{std::vector<double>(m.node_count(), 31.5)};
  const SliceGrid c = surface_slice(m, constant, {Axis::X, 20.0}, 13, 7);
  for (double v : c.values) CHECK(v == doctest::Approx(31.5).epsilon(1e-12));
  CHECK_THROWS_AS(surface_slice(m, constant, {Axis::Z, 40.0}), ParameterError);
}

TEST_CASE("field CSV has one row per node") {
  const TetMesh m = model_mesh(5);
  ScalarField f{std::vector<double>(m.node_count(), 30.0)};
  std::ostringstream out;
  write_field_csv(out, m, f);
  const std::string s = out.str();
  CHECK(s.rfind("node_index,x_mm,y_mm,z_mm,T_celsius\n", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')) == m.node_count() + 1);
}

}
