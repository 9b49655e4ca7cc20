#pragma once

#include <iosfwd>
#include <string_view>
#include <vector>

namespace thermo {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Tissue block extents, mm.
struct TissueDims {
  double x_len = 120.0;
  double y_len = 60.0;
  double z_len = 25.0;
};

enum class ShapeFamily { RegularPolygon, StarPolygon };

std::string_view family_name(ShapeFamily family);  // "polygon" / "star"
ShapeFamily parse_family(std::string_view name);

/// Prismatic tumor description. Lengths in mm, area in mm^2.
struct TumorShape {
  ShapeFamily family = ShapeFamily::RegularPolygon;
  int n = 3;                   // sides (polygon) or wings (star)
  double base_area = 400.0;
  double inner_radius = 10.0;  // star only
  double top_depth = 12.0;     // depth of the prism top face below the top surface
  double prism_height = 8.0;
};

/// Simple closed polygon, vertices counter-clockwise, no repeated closing vertex.
struct Polygon2D {
  std::vector<Vec2> vertices;
};

/// Axis-aligned box in mm.
struct Box3 {
  double lo[3] = {0.0, 0.0, 0.0};
  double hi[3] = {0.0, 0.0, 0.0};
};

/// Tissue block with a vertical tumor prism. `base` is centered at the origin;
/// the prism footprint is `base` translated by `center`.
struct GeometrySpec {
  TissueDims dims;
  TumorShape shape;
  Polygon2D base;
  Vec2 center;
  double z_bottom = 0.0;  // prism extent along z
  double z_top = 0.0;

  bool has_tumor() const { return !base.vertices.empty(); }
  /// Footprint bounding box (translated), z range of the prism.
  Box3 tumor_bounds() const;
};

/// Regular n-gon of the given area centered at the origin, one vertex on +y.
Polygon2D regular_polygon(int n, double area);

/// n-wing star: 2n vertices alternating the outer radius (first one on +y)
/// and `inner_radius`. The outer radius is chosen so the area matches.
Polygon2D star_polygon(int n, double inner_radius, double area);

double circumradius_for_area(int n, double area);
double star_outer_radius(int n, double inner_radius, double area);

/// Base polygon for a tumor shape (dispatches on family).
Polygon2D base_polygon(const TumorShape& shape);

GeometrySpec place_prism(const TumorShape& shape, const TissueDims& dims);

/// Block without a tumor (used for verification problems).
GeometrySpec empty_block(const TissueDims& dims);

/// Signed shoelace area (positive for counter-clockwise).
double shoelace_area(const Polygon2D& poly);

/// Inside test by crossing number. Points on an edge (within 1e-12 of the
/// polygon scale) are reported as inside.
bool point_in_polygon(Vec2 p, const Polygon2D& poly);

/// Area of the intersection of `poly` with the axis-aligned rectangle
/// [x0, x1] x [y0, y1]. Exact for any simple polygon.
double clipped_area(const Polygon2D& poly, double x0, double x1, double y0, double y1);

double max_vertex_radius(const Polygon2D& poly);

/// CSV with header `x_mm,y_mm`, one vertex per row.
void write_polygon_csv(std::ostream& out, const Polygon2D& poly);

}  // namespace thermo
