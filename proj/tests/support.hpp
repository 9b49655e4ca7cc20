#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "thermo/config.hpp"
#include "thermo/geometry.hpp"

namespace testing {

inline std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("thermo_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Winding number of a closed polygon around p, by summing signed angles.
inline int winding_number(thermo::Vec2 p, const thermo::Polygon2D& poly) {
  double total = 0.0;
  const auto& v = poly.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& a = v[i];
    const auto& b = v[(i + 1) % v.size()];
    const double ax = a.x - p.x, ay = a.y - p.y, bx = b.x - p.x, by = b.y - p.y;
    total += std::atan2(ax * by - ay * bx, ax * bx + ay * by);
  }
  return static_cast<int>(std::lround(total / (2.0 * M_PI)));
}

// Fan area from the origin; valid for polygons star-shaped about the origin.
inline double fan_area(const thermo::Polygon2D& poly) {
  double a = 0.0;
  const auto& v = poly.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& p = v[i];
    const auto& q = v[(i + 1) % v.size()];
    a += 0.5 * (p.x * q.y - p.y * q.x);
  }
  return a;
}

// A study small enough for unit tests: short sweep on a coarse grid.
inline thermo::StudyConfig small_study(const std::filesystem::path& out) {
  thermo::StudyConfig cfg;
  cfg.sweep = {3, 1, 6};
  cfg.mesh = {10, 5, 3};
  cfg.study_levels = {{8, 4, 3}, {10, 5, 3}, {12, 6, 4}};
  cfg.slice_models = {4};
  cfg.profile_figure_models = {3, 6};
  cfg.expected_rows = 0;
  cfg.solver_tol = 1e-10;
  cfg.out_dir = out.string();
  return cfg;
}

}  // namespace testing

#include "thermo/fem.hpp"
#include "thermo/mesh.hpp"

namespace testing {

// k T'' + q = 0 on [0, L], T(0) = t_bottom, -k T'(L) = h (T(L) - t_ambient).
// SI units, z in metres.
inline double slab_temperature(const thermo::ThermalParams& p, double length_m, double z_m) {
  const double k = p.k_tissue, q = p.q_tumor, h = p.h_top, L = length_m;
  const double c = (q * L + h * q * L * L / (2.0 * k) - h * (p.t_bottom - p.t_ambient)) / (k + h * L);
  return p.t_bottom + c * z_m - q * z_m * z_m / (2.0 * k);
}

// Block with the source spread uniformly over every element.
inline thermo::TetMesh slab_mesh(int nx, int ny, int nz) {
  thermo::RefinementSpec r;
  r.nx = nx;
  r.ny = ny;
  r.nz = nz;
  r.local_factor = 1;
  thermo::TetMesh m = thermo::build_mesh(thermo::empty_block(thermo::TissueDims{}), r);
  std::fill(m.tumor_fraction.begin(), m.tumor_fraction.end(), 1.0);
  std::fill(m.material.begin(), m.material.end(), thermo::Material::Tumor);
  return m;
}

// Max nodal error against the slab solution, relative to the solution's range.
inline double slab_error(int nx, int ny, int nz, const thermo::ThermalParams& p) {
  const thermo::TetMesh m = slab_mesh(nx, ny, nz);
  thermo::SolverOptions o;
  o.rel_tol = 1e-12;
  const auto sol = thermo::solve_heat(m, p, o);
  const double L = m.dims.z_len * 1e-3;
  double lo = 1e300, hi = -1e300, err = 0.0;
  for (int k = 0; k <= 200; ++k) {
    const double t = slab_temperature(p, L, L * k / 200.0);
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  for (std::size_t i = 0; i < m.node_count(); ++i) {
    err = std::max(err, std::abs(sol.temperature.values[i] - slab_temperature(p, L, m.nodes[i][2] * 1e-3)));
  }
  return err / (hi - lo);
}

// Three refinements, each halving every cell edge.
inline constexpr std::array<std::array<int, 3>, 3> kSlabLevels{{{12, 6, 12}, {24, 12, 24}, {48, 24, 48}}};

}  // namespace testing
