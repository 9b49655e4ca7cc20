#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "thermo/mesh.hpp"
#include "thermo/sparse.hpp"

namespace thermo {

/// Steady conduction parameters (SI, temperatures in degC).
struct ThermalParams {
  double k_tissue = 0.6;    // W/(m K)
  double k_tumor = 0.6;     // W/(m K)
  double q_tumor = 1.0e5;   // W/m^3
  double h_top = 20.0;      // W/(m^2 K)
  double t_ambient = 24.0;  // degC
  double t_bottom = 33.1;   // degC
};

struct ElasticParams {
  double e_tissue = 9210.87;  // Pa
  double poisson = 0.458344;
  double tumor_stiffness_factor = 10.0;
  double applied_strain = 0.06;  // compressive, fraction of z_len
};

/// One value per mesh node.
struct ScalarField {
  std::vector<double> values;
};

/// One displacement (mm) per mesh node.
struct VectorField {
  std::vector<std::array<double, 3>> values;
};

/// Discrete heat balance in W. generated = top_outflow + bottom_outflow.
struct HeatBalance {
  double generated = 0.0;
  double top_outflow = 0.0;
  double bottom_outflow = 0.0;

  double relative_imbalance() const;
};

struct HeatSolution {
  ScalarField temperature;
  SolveStats stats;
  HeatBalance balance;
};

/// Galerkin linear-tet solution of div(k grad T) + q = 0 with T = t_bottom on
/// the Bottom faces, -k dT/dn = h (T - t_ambient) on Top, insulated sides.
/// Conductivity and source are blended per element by tumor_fraction.
HeatSolution solve_heat(const TetMesh& mesh, const ThermalParams& params, const SolverOptions& options = {});

struct ElasticSolution {
  VectorField displacement;
  SolveStats stats;
};

/// Small-strain isotropic elasticity: Bottom fully clamped, Top pushed down by
/// applied_strain * z_len with free in-plane motion, free sides.
ElasticSolution solve_elastic(const TetMesh& mesh, const ElasticParams& params, const SolverOptions& options = {});

/// Moves the nodes by `u`; throws DeformationError on an inverted element.
TetMesh deform_mesh(const TetMesh& mesh, const VectorField& u);

enum class Axis { X = 0, Y = 1, Z = 2 };

struct SlicePlane {
  Axis axis = Axis::Y;
  double offset = 30.0;  // mm
};

/// Field sampled on a regular grid in a plane. Values are NaN where the grid
/// point lies outside the (possibly deformed) mesh.
struct SliceGrid {
  SlicePlane plane;
  Axis u_axis = Axis::X;
  Axis v_axis = Axis::Z;
  std::vector<double> u;  // mm
  std::vector<double> v;  // mm
  std::vector<double> values;  // row-major: values[j * u.size() + i] at (u[i], v[j])

  double at(std::size_t i, std::size_t j) const { return values[j * u.size() + i]; }
};

SliceGrid surface_slice(const TetMesh& mesh, const ScalarField& field, const SlicePlane& plane,
                        std::size_t nu = 121, std::size_t nv = 26);

/// Barycentric sample of a nodal field; NaN when p is outside the mesh.
double sample_field(const TetMesh& mesh, const PointLocator& locator, const ScalarField& field, const Point3& p);

/// CSV: node_index,x_mm,y_mm,z_mm,T_celsius
void write_field_csv(std::ostream& out, const TetMesh& mesh, const ScalarField& field);
/// CSV: u_mm,v_mm,T_celsius (one row per grid point, u fastest)
void write_slice_csv(std::ostream& out, const SliceGrid& slice);

}  // namespace thermo
