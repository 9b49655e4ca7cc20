#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "thermo/geometry.hpp"

namespace thermo {

using Point3 = std::array<double, 3>;  // mm

enum class Material : std::uint8_t { Tissue = 0, Tumor = 1 };
enum class FaceTag : std::uint8_t { Top, Bottom, SideX0, SideX1, SideY0, SideY1 };

const char* face_tag_name(FaceTag tag);

struct BoundaryFace {
  std::array<std::int32_t, 3> nodes;  // ordered so the normal points out of the block
  FaceTag tag;
};

/// Linear tetrahedral mesh of the tissue block.
///
/// `material` is the centroid label used for reporting; `tumor_fraction` is
/// the exact volume fraction of the prism inside each element's parent grid
/// cell and drives the material properties and the heat source.
struct TetMesh {
  TissueDims dims;
  std::vector<Point3> nodes;
  std::vector<std::array<std::int32_t, 4>> tets;
  std::vector<Material> material;
  std::vector<double> tumor_fraction;
  std::vector<BoundaryFace> faces;

  std::size_t node_count() const { return nodes.size(); }
  std::size_t tet_count() const { return tets.size(); }
};

/// Structured grid refinement. The base grid has nx * ny * nz cells; base
/// cells that overlap `box` are split `local_factor` times along each axis
/// (tensor-product grading). Without an explicit box the tumor bounding box
/// grown by `box_margin` mm is used. The prism's top and bottom planes are
/// always grid planes.
struct RefinementSpec {
  int nx = 24;
  int ny = 12;
  int nz = 6;
  int local_factor = 2;
  double box_margin = 5.0;
  std::optional<Box3> box;
};

/// Grid line positions along one axis of length `len`. The base spacing is
/// len / cells; `breaks` are interior positions that must be grid lines (the
/// base cells are then spread over the segments in proportion to length).
/// Base cells overlapping (lo, hi) are split into `factor` parts.
std::vector<double> axis_coordinates(double len, int cells, double lo, double hi, int factor,
                                     const std::vector<double>& breaks = {});

/// Number of tetrahedra build_mesh will produce (6 per grid cell).
std::size_t predicted_tet_count(const GeometrySpec& geom, const RefinementSpec& ref);

TetMesh build_mesh(const GeometrySpec& geom, const RefinementSpec& ref);

/// Signed volume of tet `t`, mm^3.
double tet_volume(const TetMesh& mesh, std::size_t t);
double tet_volume(const Point3& a, const Point3& b, const Point3& c, const Point3& d);
double total_volume(const TetMesh& mesh);
/// Volume of centroid-labeled tumor elements.
double labeled_tumor_volume(const TetMesh& mesh);
/// Sum of tumor_fraction * element volume.
double fractional_tumor_volume(const TetMesh& mesh);

struct QualityReport {
  std::size_t tets = 0;
  std::size_t nodes = 0;
  double min_volume = 0.0;
  double max_volume = 0.0;
  double total_volume = 0.0;
  double min_dihedral_deg = 0.0;
  double mean_dihedral_deg = 0.0;
  // Radius-ratio aspect (circumradius / (3 * inradius)); 1 for a regular tet.
  std::vector<double> aspect_bin_edges;
  std::vector<std::size_t> aspect_histogram;
};

QualityReport mesh_quality(const TetMesh& mesh);
void write_quality(std::ostream& out, const QualityReport& report);

/// Plain-text export: node table, tet table with material, face table with tag.
void write_mesh(std::ostream& out, const TetMesh& mesh);
TetMesh read_mesh(std::istream& in);

/// Barycentric location of points inside a (possibly deformed) tet mesh.
class PointLocator {
 public:
  struct Location {
    std::size_t tet;
    std::array<double, 4> weights;
  };

  explicit PointLocator(const TetMesh& mesh);

  /// Containing element, allowing barycentric weights down to -tol.
  std::optional<Location> locate(const Point3& p, double tol = 1e-9) const;

 private:
  const TetMesh* mesh_;
  std::array<double, 3> origin_{};
  std::array<double, 3> cell_{};
  std::array<int, 3> dims_{};
  std::vector<std::int64_t> bucket_start_;
  std::vector<std::int32_t> bucket_items_;

  std::array<double, 4> barycentric(std::size_t t, const Point3& p) const;
};

}  // namespace thermo
