#include "thermo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "thermo/errors.hpp"

namespace thermo {
namespace {

constexpr double kPi = std::numbers::pi;

void check_count(int n) {
  if (n < 3) throw ParameterError("polygon needs at least 3 sides/wings, got " + std::to_string(n));
}

void check_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << what << " must be positive and finite, got " << value;
    throw ParameterError(msg.str());
  }
}

// Distance from p to segment ab.
double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

// One Sutherland-Hodgman pass against the half-plane sign*(coord - bound) <= 0.
std::vector<Vec2> clip_half_plane(const std::vector<Vec2>& in, int axis, double bound, double sign) {
  std::vector<Vec2> out;
  if (in.empty()) return out;
  out.reserve(in.size() + 4);
  auto coord = [axis](Vec2 v) { return axis == 0 ? v.x : v.y; };
  auto inside = [&](Vec2 v) { return sign * (coord(v) - bound) <= 0.0; };
  Vec2 prev = in.back();
  bool prev_in = inside(prev);
  for (const Vec2 cur : in) {
    const bool cur_in = inside(cur);
    if (cur_in != prev_in) {
      const double t = (bound - coord(prev)) / (coord(cur) - coord(prev));
      Vec2 hit{prev.x + t * (cur.x - prev.x), prev.y + t * (cur.y - prev.y)};
      if (axis == 0) hit.x = bound; else hit.y = bound;
      out.push_back(hit);
    }
    if (cur_in) out.push_back(cur);
    prev = cur;
    prev_in = cur_in;
  }
  return out;
}

double signed_area(const std::vector<Vec2>& v) {
  double twice = 0.0;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    twice += v[j].x * v[i].y - v[i].x * v[j].y;
  }
  return 0.5 * twice;
}

}  // namespace

std::string_view family_name(ShapeFamily family) {
  return family == ShapeFamily::RegularPolygon ? "polygon" : "star";
}

ShapeFamily parse_family(std::string_view name) {
  if (name == "polygon") return ShapeFamily::RegularPolygon;
  if (name == "star") return ShapeFamily::StarPolygon;
  throw ParameterError("unknown shape family '" + std::string(name) + "' (expected polygon or star)");
}

Box3 GeometrySpec::tumor_bounds() const {
  Box3 box;
  box.lo[0] = box.lo[1] = std::numeric_limits<double>::infinity();
  box.hi[0] = box.hi[1] = -std::numeric_limits<double>::infinity();
  for (const Vec2 v : base.vertices) {
    box.lo[0] = std::min(box.lo[0], v.x + center.x);
    box.hi[0] = std::max(box.hi[0], v.x + center.x);
    box.lo[1] = std::min(box.lo[1], v.y + center.y);
    box.hi[1] = std::max(box.hi[1], v.y + center.y);
  }
  box.lo[2] = z_bottom;
  box.hi[2] = z_top;
  return box;
}

double circumradius_for_area(int n, double area) {
  check_count(n);
  check_positive(area, "polygon area");
  return std::sqrt(2.0 * area / (n * std::sin(2.0 * kPi / n)));
}

double star_outer_radius(int n, double inner_radius, double area) {
  check_count(n);
  check_positive(inner_radius, "star inner radius");
  check_positive(area, "star area");
  const double outer = area / (n * inner_radius * std::sin(kPi / n));
  // Round-off at the feasibility boundary must not reject the degenerate star.
  if (outer < inner_radius * (1.0 - 1e-12)) {
    std::ostringstream msg;
    msg << "star area " << area << " is infeasible for n=" << n << ", r=" << inner_radius
        << " (needs >= " << n * inner_radius * inner_radius * std::sin(kPi / n) << ")";
    throw ParameterError(msg.str());
  }
  return std::max(outer, inner_radius);
}

Polygon2D regular_polygon(int n, double area) {
  const double radius = circumradius_for_area(n, area);
  Polygon2D poly;
  poly.vertices.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double angle = kPi / 2.0 + 2.0 * kPi * k / n;
    poly.vertices.push_back({radius * std::cos(angle), radius * std::sin(angle)});
  }
  return poly;
}

Polygon2D star_polygon(int n, double inner_radius, double area) {
  const double outer = star_outer_radius(n, inner_radius, area);
  Polygon2D poly;
  poly.vertices.reserve(2 * n);
  for (int k = 0; k < 2 * n; ++k) {
    const double angle = kPi / 2.0 + kPi * k / n;
    const double radius = (k % 2 == 0) ? outer : inner_radius;
    poly.vertices.push_back({radius * std::cos(angle), radius * std::sin(angle)});
  }
  return poly;
}

Polygon2D base_polygon(const TumorShape& shape) {
  return shape.family == ShapeFamily::RegularPolygon
             ? regular_polygon(shape.n, shape.base_area)
             : star_polygon(shape.n, shape.inner_radius, shape.base_area);
}

GeometrySpec place_prism(const TumorShape& shape, const TissueDims& dims) {
  check_positive(dims.x_len, "x_len");
  check_positive(dims.y_len, "y_len");
  check_positive(dims.z_len, "z_len");
  check_positive(shape.prism_height, "prism height");
  if (!(shape.top_depth >= 0.0)) throw ParameterError("top depth must be non-negative");

  GeometrySpec spec;
  spec.dims = dims;
  spec.shape = shape;
  spec.base = base_polygon(shape);
  spec.center = {dims.x_len / 2.0, dims.y_len / 2.0};
  spec.z_top = dims.z_len - shape.top_depth;
  spec.z_bottom = spec.z_top - shape.prism_height;

  if (!(spec.z_bottom > 0.0) || !(spec.z_top < dims.z_len)) {
    std::ostringstream msg;
    msg << "prism z range [" << spec.z_bottom << ", " << spec.z_top
        << "] does not fit strictly inside thickness " << dims.z_len;
    throw PlacementError(msg.str());
  }
  const Box3 box = spec.tumor_bounds();
  if (!(box.lo[0] > 0.0 && box.hi[0] < dims.x_len && box.lo[1] > 0.0 && box.hi[1] < dims.y_len)) {
    std::ostringstream msg;
    msg << "tumor footprint [" << box.lo[0] << ", " << box.hi[0] << "] x [" << box.lo[1] << ", "
        << box.hi[1] << "] exceeds block footprint " << dims.x_len << " x " << dims.y_len;
    throw PlacementError(msg.str());
  }
  return spec;
}

GeometrySpec empty_block(const TissueDims& dims) {
  check_positive(dims.x_len, "x_len");
  check_positive(dims.y_len, "y_len");
  check_positive(dims.z_len, "z_len");
  GeometrySpec spec;
  spec.dims = dims;
  spec.center = {dims.x_len / 2.0, dims.y_len / 2.0};
  return spec;
}

double shoelace_area(const Polygon2D& poly) {
  if (poly.vertices.size() < 3) return 0.0;
  return signed_area(poly.vertices);
}

bool point_in_polygon(Vec2 p, const Polygon2D& poly) {
  const auto& v = poly.vertices;
  if (v.size() < 3) return false;
  const double tol = 1e-12 * std::max(1.0, max_vertex_radius(poly));
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if (segment_distance(p, v[j], v[i]) <= tol) return true;
    if ((v[i].y > p.y) != (v[j].y > p.y)) {
      const double x_cross = v[j].x + (p.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

double clipped_area(const Polygon2D& poly, double x0, double x1, double y0, double y1) {
  // Clipping a (possibly concave) subject against a convex window can leave
  // zero-width bridges along the window edges; they carry no signed area.
  std::vector<Vec2> v = poly.vertices;
  v = clip_half_plane(v, 0, x0, -1.0);
  v = clip_half_plane(v, 0, x1, 1.0);
  v = clip_half_plane(v, 1, y0, -1.0);
  v = clip_half_plane(v, 1, y1, 1.0);
  if (v.size() < 3) return 0.0;
  return std::abs(signed_area(v));
}

double max_vertex_radius(const Polygon2D& poly) {
  double r = 0.0;
  for (const Vec2 v : poly.vertices) r = std::max(r, std::hypot(v.x, v.y));
  return r;
}

void write_polygon_csv(std::ostream& out, const Polygon2D& poly) {
  out << "x_mm,y_mm\n";
  char buf[64];
  for (const Vec2 v : poly.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", v.x, v.y);
    out << buf;
  }
}

}  // namespace thermo
