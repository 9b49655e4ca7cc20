#include "thermo/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include "thermo/errors.hpp"

namespace thermo {
namespace {

// Freudenthal split of a hex into 6 tets along the (0,0,0)-(1,1,1) diagonal.
// Corner index bits: x = 1, y = 2, z = 4. Every face diagonal runs from the
// face's lowest corner to its highest, so neighbouring cells conform.
// Cells in the upper half of x use the split mirrored in x (corner bit 1
// flipped); both patterns cut the faces normal to x the same way, so the mesh
// stays conforming and is mirror symmetric about x = X/2.
constexpr std::array<std::array<int, 4>, 6> kHexSplit{{
    {0, 1, 3, 7},
    {0, 1, 5, 7},
    {0, 2, 3, 7},
    {0, 2, 6, 7},
    {0, 4, 5, 7},
    {0, 4, 6, 7},
}};

Box3 default_refinement_box(const GeometrySpec& geom, double margin) {
  Box3 box = geom.tumor_bounds();
  for (int a = 0; a < 3; ++a) {
    box.lo[a] -= margin;
    box.hi[a] += margin;
  }
  return box;
}

std::optional<Box3> refinement_box(const GeometrySpec& geom, const RefinementSpec& ref) {
  if (ref.box) return ref.box;
  if (!geom.has_tumor() || ref.local_factor == 1) return std::nullopt;
  return default_refinement_box(geom, ref.box_margin);
}

void check_refinement(const RefinementSpec& ref) {
  if (ref.nx < 1 || ref.ny < 1 || ref.nz < 1 || ref.local_factor < 1) {
    throw ParameterError("refinement counts must all be >= 1");
  }
}

std::array<std::vector<double>, 3> grid_axes(const GeometrySpec& geom, const RefinementSpec& ref) {
  check_refinement(ref);
  const auto box = refinement_box(geom, ref);
  const double lens[3] = {geom.dims.x_len, geom.dims.y_len, geom.dims.z_len};
  const int cells[3] = {ref.nx, ref.ny, ref.nz};
  std::array<std::vector<double>, 3> axes;
  for (int a = 0; a < 3; ++a) {
    std::vector<double> breaks;
    if (a == 2 && geom.has_tumor()) breaks = {geom.z_bottom, geom.z_top};
    if (box) {
      axes[a] = axis_coordinates(lens[a], cells[a], box->lo[a], box->hi[a], ref.local_factor, breaks);
    } else {
      axes[a] = axis_coordinates(lens[a], cells[a], 0.0, 0.0, 1, breaks);
    }
  }
  return axes;
}

std::uint64_t face_key(std::int32_t a, std::int32_t b, std::int32_t c) {
  std::array<std::uint64_t, 3> v{static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(b),
                                 static_cast<std::uint64_t>(c)};
  std::sort(v.begin(), v.end());
  return (v[0] << 42) | (v[1] << 21) | v[2];
}

Point3 sub(const Point3& a, const Point3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Point3 cross(const Point3& a, const Point3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double dot3(const Point3& a, const Point3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm3(const Point3& a) { return std::sqrt(dot3(a, a)); }

FaceTag classify_face(const TetMesh& mesh, const std::array<std::int32_t, 3>& f) {
  const double lens[3] = {mesh.dims.x_len, mesh.dims.y_len, mesh.dims.z_len};
  const double tol = 1e-9 * std::max({lens[0], lens[1], lens[2]});
  auto on_plane = [&](int axis, double value) {
    return std::all_of(f.begin(), f.end(),
                       [&](std::int32_t n) { return std::abs(mesh.nodes[n][axis] - value) <= tol; });
  };
  if (on_plane(2, lens[2])) return FaceTag::Top;
  if (on_plane(2, 0.0)) return FaceTag::Bottom;
  if (on_plane(0, 0.0)) return FaceTag::SideX0;
  if (on_plane(0, lens[0])) return FaceTag::SideX1;
  if (on_plane(1, 0.0)) return FaceTag::SideY0;
  if (on_plane(1, lens[1])) return FaceTag::SideY1;
  throw std::logic_error("boundary face not on a block face");
}

}  // namespace

const char* face_tag_name(FaceTag tag) {
  switch (tag) {
    case FaceTag::Top: return "Top";
    case FaceTag::Bottom: return "Bottom";
    case FaceTag::SideX0: return "SideX0";
    case FaceTag::SideX1: return "SideX1";
    case FaceTag::SideY0: return "SideY0";
    case FaceTag::SideY1: return "SideY1";
  }
  return "?";
}

std::vector<double> axis_coordinates(double len, int cells, double lo, double hi, int factor,
                                     const std::vector<double>& breaks) {
  if (cells < 1 || factor < 1) throw ParameterError("axis needs at least one cell");
  std::vector<double> stops{0.0};
  for (double b : breaks) {
    if (b > stops.back() && b < len) stops.push_back(b);
  }
  stops.push_back(len);

  const double h = len / cells;
  std::vector<double> base{0.0};
  for (std::size_t s = 0; s + 1 < stops.size(); ++s) {
    const double a = stops[s], b = stops[s + 1];
    const int parts = std::max(1, static_cast<int>(std::lround((b - a) / h)));
    for (int p = 1; p <= parts; ++p) base.push_back(p == parts ? b : a + (b - a) * p / parts);
  }

  std::vector<double> coords{0.0};
  for (std::size_t i = 0; i + 1 < base.size(); ++i) {
    const double a = base[i], b = base[i + 1];
    const bool refine = factor > 1 && b > lo && a < hi;
    const int parts = refine ? factor : 1;
    for (int p = 1; p <= parts; ++p) coords.push_back(p == parts ? b : a + (b - a) * p / parts);
  }
  return coords;
}

std::size_t predicted_tet_count(const GeometrySpec& geom, const RefinementSpec& ref) {
  const auto axes = grid_axes(geom, ref);
  return 6 * (axes[0].size() - 1) * (axes[1].size() - 1) * (axes[2].size() - 1);
}

double tet_volume(const Point3& a, const Point3& b, const Point3& c, const Point3& d) {
  return dot3(sub(b, a), cross(sub(c, a), sub(d, a))) / 6.0;
}

double tet_volume(const TetMesh& mesh, std::size_t t) {
  const auto& e = mesh.tets[t];
  return tet_volume(mesh.nodes[e[0]], mesh.nodes[e[1]], mesh.nodes[e[2]], mesh.nodes[e[3]]);
}

double total_volume(const TetMesh& mesh) {
  double v = 0.0;
  for (std::size_t t = 0; t < mesh.tet_count(); ++t) v += tet_volume(mesh, t);
  return v;
}

double labeled_tumor_volume(const TetMesh& mesh) {
  double v = 0.0;
  for (std::size_t t = 0; t < mesh.tet_count(); ++t) {
    if (mesh.material[t] == Material::Tumor) v += tet_volume(mesh, t);
  }
  return v;
}

double fractional_tumor_volume(const TetMesh& mesh) {
  double v = 0.0;
  for (std::size_t t = 0; t < mesh.tet_count(); ++t) v += mesh.tumor_fraction[t] * tet_volume(mesh, t);
  return v;
}

TetMesh build_mesh(const GeometrySpec& geom, const RefinementSpec& ref) {
  const auto axes = grid_axes(geom, ref);
  const std::size_t cx = axes[0].size() - 1;
  const std::size_t cy = axes[1].size() - 1;
  const std::size_t cz = axes[2].size() - 1;
  const std::size_t px = cx + 1;
  const std::size_t py = cy + 1;

  TetMesh mesh;
  mesh.dims = geom.dims;
  mesh.nodes.reserve(px * py * (cz + 1));
  for (std::size_t k = 0; k <= cz; ++k) {
    for (std::size_t j = 0; j <= cy; ++j) {
      for (std::size_t i = 0; i <= cx; ++i) mesh.nodes.push_back({axes[0][i], axes[1][j], axes[2][k]});
    }
  }
  if (mesh.nodes.size() >= (std::size_t{1} << 21)) throw ParameterError("mesh too large (node index overflow)");

  // Exact prism fraction of each xy column; z overlap handled per layer.
  std::vector<double> column_fraction(cx * cy, 0.0);
  Box3 tb{};
  if (geom.has_tumor()) {
    Polygon2D footprint = geom.base;
    for (Vec2& v : footprint.vertices) {
      v.x += geom.center.x;
      v.y += geom.center.y;
    }
    tb = geom.tumor_bounds();
    for (std::size_t j = 0; j < cy; ++j) {
      const double y0 = axes[1][j], y1 = axes[1][j + 1];
      if (y1 <= tb.lo[1] || y0 >= tb.hi[1]) continue;
      for (std::size_t i = 0; i < cx; ++i) {
        const double x0 = axes[0][i], x1 = axes[0][i + 1];
        if (x1 <= tb.lo[0] || x0 >= tb.hi[0]) continue;
        column_fraction[j * cx + i] = clipped_area(footprint, x0, x1, y0, y1) / ((x1 - x0) * (y1 - y0));
      }
    }
  }

  const std::size_t cells = cx * cy * cz;
  mesh.tets.reserve(6 * cells);
  mesh.material.reserve(6 * cells);
  mesh.tumor_fraction.reserve(6 * cells);
  for (std::size_t k = 0; k < cz; ++k) {
    const double z0 = axes[2][k], z1 = axes[2][k + 1];
    double zfrac = 0.0;
    if (geom.has_tumor()) {
      zfrac = std::max(0.0, std::min(z1, geom.z_top) - std::max(z0, geom.z_bottom)) / (z1 - z0);
    }
    for (std::size_t j = 0; j < cy; ++j) {
      for (std::size_t i = 0; i < cx; ++i) {
        std::array<std::int32_t, 8> corner;
        for (int b = 0; b < 8; ++b) {
          const std::size_t ii = i + (b & 1), jj = j + ((b >> 1) & 1), kk = k + ((b >> 2) & 1);
          corner[b] = static_cast<std::int32_t>(ii + px * (jj + py * kk));
        }
        const double frac = zfrac * column_fraction[j * cx + i];
        const int flip = axes[0][i] + axes[0][i + 1] > axes[0].front() + axes[0].back() ? 1 : 0;
        for (const auto& split : kHexSplit) {
          std::array<std::int32_t, 4> tet{corner[split[0] ^ flip], corner[split[1] ^ flip], corner[split[2] ^ flip],
                                          corner[split[3] ^ flip]};
          if (tet_volume(mesh.nodes[tet[0]], mesh.nodes[tet[1]], mesh.nodes[tet[2]], mesh.nodes[tet[3]]) < 0.0) {
            std::swap(tet[2], tet[3]);
          }
          Material label = Material::Tissue;
          if (geom.has_tumor()) {
            Point3 c{0.0, 0.0, 0.0};
            for (auto n : tet) {
              for (int a = 0; a < 3; ++a) c[a] += 0.25 * mesh.nodes[n][a];
            }
            if (c[2] >= geom.z_bottom && c[2] <= geom.z_top &&
                point_in_polygon({c[0] - geom.center.x, c[1] - geom.center.y}, geom.base)) {
              label = Material::Tumor;
            }
          }
          mesh.tets.push_back(tet);
          mesh.material.push_back(label);
          mesh.tumor_fraction.push_back(frac);
        }
      }
    }
  }

  // Boundary faces are the tet faces seen exactly once.
  static constexpr int kFaces[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
  std::unordered_map<std::uint64_t, std::pair<int, std::array<std::int32_t, 3>>> seen;
  seen.reserve(mesh.tets.size() * 3);
  for (const auto& tet : mesh.tets) {
    for (const auto& f : kFaces) {
      const std::array<std::int32_t, 3> tri{tet[f[0]], tet[f[1]], tet[f[2]]};
      auto [it, inserted] = seen.try_emplace(face_key(tri[0], tri[1], tri[2]), 0, tri);
      ++it->second.first;
    }
  }
  std::vector<std::pair<std::uint64_t, std::array<std::int32_t, 3>>> boundary;
  for (const auto& [key, entry] : seen) {
    if (entry.first == 1) boundary.emplace_back(key, entry.second);
  }
  std::sort(boundary.begin(), boundary.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  mesh.faces.reserve(boundary.size());
  for (const auto& [key, tri] : boundary) mesh.faces.push_back({tri, classify_face(mesh, tri)});
  std::stable_sort(mesh.faces.begin(), mesh.faces.end(),
                   [](const BoundaryFace& a, const BoundaryFace& b) { return a.tag < b.tag; });
  return mesh;
}

QualityReport mesh_quality(const TetMesh& mesh) {
  QualityReport r;
  r.tets = mesh.tet_count();
  r.nodes = mesh.node_count();
  r.aspect_bin_edges = {1.0, 1.5, 2.0, 3.0, 5.0, 10.0};
  r.aspect_histogram.assign(r.aspect_bin_edges.size(), 0);
  r.min_volume = std::numeric_limits<double>::infinity();
  r.max_volume = -std::numeric_limits<double>::infinity();
  r.min_dihedral_deg = 180.0;
  double dihedral_sum = 0.0;
  static constexpr int kEdges[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  for (std::size_t t = 0; t < mesh.tet_count(); ++t) {
    const auto& e = mesh.tets[t];
    const Point3* p[4] = {&mesh.nodes[e[0]], &mesh.nodes[e[1]], &mesh.nodes[e[2]], &mesh.nodes[e[3]]};
    const double vol = tet_volume(*p[0], *p[1], *p[2], *p[3]);
    r.min_volume = std::min(r.min_volume, vol);
    r.max_volume = std::max(r.max_volume, vol);
    r.total_volume += vol;

    for (const auto& edge : kEdges) {
      // The two faces sharing edge (a, b) contain the remaining vertices c and d.
      int others[2], m = 0;
      for (int v = 0; v < 4; ++v) {
        if (v != edge[0] && v != edge[1]) others[m++] = v;
      }
      const Point3 axis = sub(*p[edge[1]], *p[edge[0]]);
      const double axis_len2 = dot3(axis, axis);
      auto perp = [&](int v) {
        Point3 w = sub(*p[v], *p[edge[0]]);
        const double s = dot3(w, axis) / axis_len2;
        return Point3{w[0] - s * axis[0], w[1] - s * axis[1], w[2] - s * axis[2]};
      };
      const Point3 u = perp(others[0]);
      const Point3 w = perp(others[1]);
      const double c = std::clamp(dot3(u, w) / (norm3(u) * norm3(w)), -1.0, 1.0);
      const double angle = std::acos(c) * 180.0 / std::numbers::pi;
      r.min_dihedral_deg = std::min(r.min_dihedral_deg, angle);
      dihedral_sum += angle;
    }

    // Inradius = 3V / surface area; circumradius from the standard formula.
    double area = 0.0;
    static constexpr int kFaces[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
    for (const auto& f : kFaces) area += 0.5 * norm3(cross(sub(*p[f[1]], *p[f[0]]), sub(*p[f[2]], *p[f[0]])));
    const double inradius = 3.0 * std::abs(vol) / area;
    const Point3 a = sub(*p[1], *p[0]), b = sub(*p[2], *p[0]), c = sub(*p[3], *p[0]);
    const Point3 num{dot3(a, a) * cross(b, c)[0] + dot3(b, b) * cross(c, a)[0] + dot3(c, c) * cross(a, b)[0],
                     dot3(a, a) * cross(b, c)[1] + dot3(b, b) * cross(c, a)[1] + dot3(c, c) * cross(a, b)[1],
                     dot3(a, a) * cross(b, c)[2] + dot3(b, b) * cross(c, a)[2] + dot3(c, c) * cross(a, b)[2]};
    const double circumradius = norm3(num) / (12.0 * std::abs(vol));
    const double aspect = circumradius / (3.0 * inradius);
    std::size_t bin = 0;
    while (bin + 1 < r.aspect_bin_edges.size() && aspect >= r.aspect_bin_edges[bin + 1]) ++bin;
    ++r.aspect_histogram[bin];
  }
  if (mesh.tet_count() > 0) r.mean_dihedral_deg = dihedral_sum / (6.0 * mesh.tet_count());
  return r;
}

void write_quality(std::ostream& out, const QualityReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "nodes %zu\ntets %zu\n", r.nodes, r.tets);
  out << buf;
  std::snprintf(buf, sizeof buf, "volume total %.10g min %.10g max %.10g\n", r.total_volume, r.min_volume,
                r.max_volume);
  out << buf;
  std::snprintf(buf, sizeof buf, "dihedral min %.4f mean %.4f deg\n", r.min_dihedral_deg, r.mean_dihedral_deg);
  out << buf;
  out << "aspect histogram (radius ratio):\n";
  for (std::size_t b = 0; b < r.aspect_histogram.size(); ++b) {
    if (b + 1 < r.aspect_bin_edges.size()) {
      std::snprintf(buf, sizeof buf, "  [%g, %g) %zu\n", r.aspect_bin_edges[b], r.aspect_bin_edges[b + 1],
                    r.aspect_histogram[b]);
    } else {
      std::snprintf(buf, sizeof buf, "  [%g, inf) %zu\n", r.aspect_bin_edges[b], r.aspect_histogram[b]);
    }
    out << buf;
  }
}

void write_mesh(std::ostream& out, const TetMesh& mesh) {
  char buf[160];
  out << "# thermo tet mesh v1\n";
  std::snprintf(buf, sizeof buf, "dims %.17g %.17g %.17g\n", mesh.dims.x_len, mesh.dims.y_len, mesh.dims.z_len);
  out << buf;
  out << "nodes " << mesh.nodes.size() << '\n';
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    const auto& p = mesh.nodes[i];
    std::snprintf(buf, sizeof buf, "%zu %.17g %.17g %.17g\n", i, p[0], p[1], p[2]);
    out << buf;
  }
  out << "tets " << mesh.tets.size() << '\n';
  for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
    const auto& e = mesh.tets[t];
    std::snprintf(buf, sizeof buf, "%zu %d %d %d %d %s %.17g\n", t, e[0], e[1], e[2], e[3],
                  mesh.material[t] == Material::Tumor ? "Tumor" : "Tissue", mesh.tumor_fraction[t]);
    out << buf;
  }
  out << "faces " << mesh.faces.size() << '\n';
  for (const auto& f : mesh.faces) {
    std::snprintf(buf, sizeof buf, "%d %d %d %s\n", f.nodes[0], f.nodes[1], f.nodes[2], face_tag_name(f.tag));
    out << buf;
  }
}

TetMesh read_mesh(std::istream& in) {
  auto fail = [](const std::string& what) -> TetMesh { throw ParameterError("mesh file: " + what); };
  std::string line, word;
  if (!std::getline(in, line) || line.rfind("# thermo tet mesh v1", 0) != 0) return fail("bad header");
  TetMesh mesh;
  std::size_t count = 0;
  if (!(in >> word >> mesh.dims.x_len >> mesh.dims.y_len >> mesh.dims.z_len) || word != "dims") {
    return fail("missing dims");
  }
  if (!(in >> word >> count) || word != "nodes") return fail("missing node table");
  mesh.nodes.resize(count);
  for (auto& p : mesh.nodes) {
    std::size_t idx;
    if (!(in >> idx >> p[0] >> p[1] >> p[2])) return fail("truncated node table");
  }
  if (!(in >> word >> count) || word != "tets") return fail("missing tet table");
  mesh.tets.resize(count);
  mesh.material.resize(count);
  mesh.tumor_fraction.resize(count);
  for (std::size_t t = 0; t < count; ++t) {
    std::size_t idx;
    std::string mat;
    auto& e = mesh.tets[t];
    if (!(in >> idx >> e[0] >> e[1] >> e[2] >> e[3] >> mat >> mesh.tumor_fraction[t])) {
      return fail("truncated tet table");
    }
    mesh.material[t] = mat == "Tumor" ? Material::Tumor : Material::Tissue;
  }
  if (!(in >> word >> count) || word != "faces") return fail("missing face table");
  mesh.faces.resize(count);
  for (auto& f : mesh.faces) {
    std::string tag;
    if (!(in >> f.nodes[0] >> f.nodes[1] >> f.nodes[2] >> tag)) return fail("truncated face table");
    static constexpr FaceTag kTags[] = {FaceTag::Top,    FaceTag::Bottom, FaceTag::SideX0,
                                        FaceTag::SideX1, FaceTag::SideY0, FaceTag::SideY1};
    bool ok = false;
    for (FaceTag t : kTags) {
      if (tag == face_tag_name(t)) {
        f.tag = t;
        ok = true;
      }
    }
    if (!ok) return fail("unknown face tag " + tag);
  }
  return mesh;
}

PointLocator::PointLocator(const TetMesh& mesh) : mesh_(&mesh) {
  std::array<double, 3> lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity()};
  std::array<double, 3> hi{-lo[0], -lo[1], -lo[2]};
  for (const auto& p : mesh.nodes) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  // Roughly one element per bucket on average, capped per axis.
  const double target = std::cbrt(static_cast<double>(std::max<std::size_t>(mesh.tet_count(), 1)) / 2.0);
  const double span_max = std::max({hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]});
  for (int a = 0; a < 3; ++a) {
    const double span = std::max(hi[a] - lo[a], 1e-12);
    dims_[a] = std::clamp(static_cast<int>(std::ceil(target * span / span_max)), 1, 256);
    origin_[a] = lo[a];
    cell_[a] = span / dims_[a];
  }
  const std::size_t buckets = static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
  auto range_of = [&](std::size_t t, std::array<int, 3>& b0, std::array<int, 3>& b1) {
    const auto& e = mesh.tets[t];
    for (int a = 0; a < 3; ++a) {
      double mn = mesh.nodes[e[0]][a], mx = mn;
      for (int v = 1; v < 4; ++v) {
        mn = std::min(mn, mesh.nodes[e[v]][a]);
        mx = std::max(mx, mesh.nodes[e[v]][a]);
      }
      b0[a] = std::clamp(static_cast<int>(std::floor((mn - origin_[a]) / cell_[a])), 0, dims_[a] - 1);
      b1[a] = std::clamp(static_cast<int>(std::floor((mx - origin_[a]) / cell_[a])), 0, dims_[a] - 1);
    }
  };
  std::vector<std::int64_t> counts(buckets + 1, 0);
  std::array<int, 3> b0{}, b1{};
  for (int pass = 0; pass < 2; ++pass) {
    if (pass == 1) {
      bucket_start_.assign(buckets + 1, 0);
      for (std::size_t b = 0; b < buckets; ++b) bucket_start_[b + 1] = bucket_start_[b] + counts[b];
      bucket_items_.assign(static_cast<std::size_t>(bucket_start_[buckets]), 0);
      std::fill(counts.begin(), counts.end(), 0);
    }
    for (std::size_t t = 0; t < mesh.tet_count(); ++t) {
      range_of(t, b0, b1);
      for (int k = b0[2]; k <= b1[2]; ++k) {
        for (int j = b0[1]; j <= b1[1]; ++j) {
          for (int i = b0[0]; i <= b1[0]; ++i) {
            const std::size_t b = static_cast<std::size_t>(i) + dims_[0] * (j + static_cast<std::size_t>(dims_[1]) * k);
            if (pass == 0) {
              ++counts[b];
            } else {
              bucket_items_[bucket_start_[b] + counts[b]++] = static_cast<std::int32_t>(t);
            }
          }
        }
      }
    }
  }
}

std::array<double, 4> PointLocator::barycentric(std::size_t t, const Point3& p) const {
  const auto& e = mesh_->tets[t];
  const auto& n = mesh_->nodes;
  const double vol = tet_volume(n[e[0]], n[e[1]], n[e[2]], n[e[3]]);
  const double w0 = tet_volume(p, n[e[1]], n[e[2]], n[e[3]]) / vol;
  const double w1 = tet_volume(n[e[0]], p, n[e[2]], n[e[3]]) / vol;
  const double w2 = tet_volume(n[e[0]], n[e[1]], p, n[e[3]]) / vol;
  return {w0, w1, w2, 1.0 - w0 - w1 - w2};
}

std::optional<PointLocator::Location> PointLocator::locate(const Point3& p, double tol) const {
  std::array<int, 3> b{};
  for (int a = 0; a < 3; ++a) {
    const double rel = (p[a] - origin_[a]) / cell_[a];
    if (rel < -1e-6 * dims_[a] || rel > dims_[a] * (1.0 + 1e-6)) return std::nullopt;
    b[a] = std::clamp(static_cast<int>(std::floor(rel)), 0, dims_[a] - 1);
  }
  const std::size_t bucket = static_cast<std::size_t>(b[0]) + dims_[0] * (b[1] + static_cast<std::size_t>(dims_[1]) * b[2]);
  std::optional<Location> best;
  double best_min = -std::numeric_limits<double>::infinity();
  for (auto k = bucket_start_[bucket]; k < bucket_start_[bucket + 1]; ++k) {
    const std::size_t t = static_cast<std::size_t>(bucket_items_[k]);
    const auto w = barycentric(t, p);
    const double mn = std::min({w[0], w[1], w[2], w[3]});
    // Prefer the element containing p most deeply; ties keep the lowest index.
    if (mn >= -tol && mn > best_min) {
      best_min = mn;
      best = Location{t, w};
      if (mn >= 0.0) break;
    }
  }
  return best;
}

}  // namespace thermo
