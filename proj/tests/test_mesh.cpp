#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "thermo/errors.hpp"
#include "thermo/mesh.hpp"

using namespace thermo;

namespace {

GeometrySpec decagon() {
  TumorShape s;
  s.n = 10;
  return place_prism(s, TissueDims{});
}

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

std::array<double, 3> sub(const Point3& a, const Point3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
std::array<double, 3> cross(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

}  // namespace

TEST_SUITE("mesh") {

TEST_CASE("single hex splits into six equal tets") {
  const TissueDims unit{1.0, 1.0, 1.0};
  RefinementSpec r;
  r.nx = r.ny = r.nz = 1;
  r.local_factor = 1;
  const TetMesh m = build_mesh(empty_block(unit), r);
  CHECK(m.tet_count() == 6);
  CHECK(m.node_count() == 8);
  CHECK(total_volume(m) == doctest::Approx(1.0).epsilon(1e-14));
  for (std::size_t t = 0; t < 6; ++t) CHECK(tet_volume(m, t) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(m.faces.size() == 12);
  const QualityReport q = mesh_quality(m);
  CHECK(q.min_volume == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("uniform grid: minimum volume is the hex volume over six") {
  RefinementSpec r;
  r.nx = 4, r.ny = 3, r.nz = 2;
  r.local_factor = 1;
  const TetMesh m = build_mesh(empty_block(TissueDims{}), r);
  const double hex = (120.0 / 4) * (60.0 / 3) * (25.0 / 2);
  CHECK(mesh_quality(m).min_volume == doctest::Approx(hex / 6).epsilon(1e-12));
}

TEST_CASE("zero cells are rejected") {
  RefinementSpec r;
  r.nx = 0;
  CHECK_THROWS_AS(build_mesh(empty_block(TissueDims{}), r), ParameterError);
}

TEST_CASE("volumes partition the block and every tet is positively oriented") {
  for (const auto& r : {level(18, 8, 5), level(19, 11, 5), level(8, 4, 3)}) {
    const TetMesh m = build_mesh(decagon(), r);
    CHECK(total_volume(m) == doctest::Approx(120.0 * 60.0 * 25.0).epsilon(1e-12));
    for (std::size_t t = 0; t < m.tet_count(); ++t) REQUIRE(tet_volume(m, t) > 0.0);
  }
}

TEST_CASE("interior faces are shared by two tets, boundary faces by one") {
  const TetMesh m = build_mesh(decagon(), level(8, 4, 3));
  std::map<std::array<std::int32_t, 3>, int> count;
  for (const auto& t : m.tets) {
    for (int skip = 0; skip < 4; ++skip) {
      std::array<std::int32_t, 3> f{};
      int k = 0;
      for (int i = 0; i < 4; ++i) {
        if (i != skip) f[k++] = t[i];
      }
      std::sort(f.begin(), f.end());
      ++count[f];
    }
  }
  std::size_t singles = 0;
  for (const auto& [f, c] : count) {
    CHECK((c == 1 || c == 2));
    if (c == 1) ++singles;
  }
  CHECK(singles == m.faces.size());
  for (const auto& bf : m.faces) {
    auto f = bf.nodes;
    std::sort(f.begin(), f.end());
    CHECK(count[f] == 1);
  }
}

TEST_CASE("boundary triangles tile the six block faces with outward normals") {
  const TetMesh m = build_mesh(decagon(), level(8, 4, 3));
  std::map<FaceTag, double> area;
  const std::map<FaceTag, std::array<double, 3>> outward{
      {FaceTag::Top, {0, 0, 1}},     {FaceTag::Bottom, {0, 0, -1}}, {FaceTag::SideX0, {-1, 0, 0}},
      {FaceTag::SideX1, {1, 0, 0}}, {FaceTag::SideY0, {0, -1, 0}}, {FaceTag::SideY1, {0, 1, 0}}};
  for (const auto& f : m.faces) {
    const auto n = cross(sub(m.nodes[f.nodes[1]], m.nodes[f.nodes[0]]), sub(m.nodes[f.nodes[2]], m.nodes[f.nodes[0]]));
    const double a = 0.5 * std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
    const auto& d = outward.at(f.tag);
    CHECK(n[0] * d[0] + n[1] * d[1] + n[2] * d[2] == doctest::Approx(2 * a).epsilon(1e-9));
    area[f.tag] += a;
  }
  CHECK(area[FaceTag::Top] == doctest::Approx(120.0 * 60.0));
  CHECK(area[FaceTag::Bottom] == doctest::Approx(120.0 * 60.0));
  CHECK(area[FaceTag::SideX0] == doctest::Approx(60.0 * 25.0));
  CHECK(area[FaceTag::SideX1] == doctest::Approx(60.0 * 25.0));
  CHECK(area[FaceTag::SideY0] == doctest::Approx(120.0 * 25.0));
  CHECK(area[FaceTag::SideY1] == doctest::Approx(120.0 * 25.0));
}

TEST_CASE("tumor volume: labelled within 5 percent, fractional exact") {
  const double exact = 400.0 * 8.0;
  for (ShapeFamily f : {ShapeFamily::RegularPolygon, ShapeFamily::StarPolygon}) {
    TumorShape s;
    s.family = f;
    s.n = 10;
    const TetMesh m = build_mesh(place_prism(s, TissueDims{}), level(18, 8, 5));
    CHECK(m.tet_count() == 22464);
    CHECK(std::abs(labeled_tumor_volume(m) - exact) / exact < 0.05);
    CHECK(fractional_tumor_volume(m) == doctest::Approx(exact).epsilon(1e-9));
  }
}

TEST_CASE("labelling error is bounded by the elements the tumor boundary cuts") {
  const double exact = 400.0 * 8.0;
  for (const auto& r : {level(18, 8, 5), level(19, 11, 5), level(20, 13, 6)}) {
    const TetMesh m = build_mesh(decagon(), r);
    double cut = 0.0;
    for (std::size_t t = 0; t < m.tet_count(); ++t) {
      const double f = m.tumor_fraction[t];
      if (f > 0.0 && f < 1.0) cut += tet_volume(m, t);
      // whole elements are labelled consistently with their fraction
      if (f == 1.0) CHECK(m.material[t] == Material::Tumor);
      if (f == 0.0) CHECK(m.material[t] == Material::Tissue);
    }
    const double err = std::abs(labeled_tumor_volume(m) - exact);
    CHECK(err <= cut);
    CHECK(err / exact < 0.05);
  }
}

TEST_CASE("predicted tet count matches and grading lies between uniform counts") {
  const GeometrySpec g = decagon();
  for (const auto& r : {level(18, 8, 5), level(19, 11, 5), level(20, 13, 6)}) {
    CHECK(predicted_tet_count(g, r) == build_mesh(g, r).tet_count());
  }
  RefinementSpec graded;
  graded.nx = 10, graded.ny = 5, graded.nz = 4;
  RefinementSpec coarse = graded, fine = graded;
  coarse.local_factor = 1;
  fine.local_factor = 1;
  fine.nx *= 2, fine.ny *= 2, fine.nz *= 2;
  const std::size_t c = build_mesh(g, coarse).tet_count();
  const std::size_t m = build_mesh(g, graded).tet_count();
  const std::size_t f = build_mesh(g, fine).tet_count();
  CHECK(c < m);
  CHECK(m < f);
}

TEST_CASE("prism top and bottom are grid planes") {
  const GeometrySpec g = decagon();
  const TetMesh m = build_mesh(g, level(18, 8, 5));
  bool top = false, bottom = false;
  for (const auto& p : m.nodes) {
    top |= std::abs(p[2] - g.z_top) < 1e-12;
    bottom |= std::abs(p[2] - g.z_bottom) < 1e-12;
  }
  CHECK(top);
  CHECK(bottom);
}

TEST_CASE("mesh text export round-trips") {
  const TetMesh m = build_mesh(decagon(), level(8, 4, 3));
  std::stringstream ss;
  write_mesh(ss, m);
  const TetMesh r = read_mesh(ss);
  REQUIRE(r.node_count() == m.node_count());
  REQUIRE(r.tet_count() == m.tet_count());
  REQUIRE(r.faces.size() == m.faces.size());
  for (std::size_t i = 0; i < m.node_count(); ++i) CHECK(r.nodes[i] == m.nodes[i]);
  for (std::size_t t = 0; t < m.tet_count(); ++t) {
    CHECK(r.tets[t] == m.tets[t]);
    CHECK(r.material[t] == m.material[t]);
    CHECK(r.tumor_fraction[t] == m.tumor_fraction[t]);
  }
  std::istringstream bad("not a mesh\n");
  CHECK_THROWS_AS(read_mesh(bad), ParameterError);
}

TEST_CASE("construction is deterministic") {
  const TetMesh a = build_mesh(decagon(), level(8, 4, 3));
  const TetMesh b = build_mesh(decagon(), level(8, 4, 3));
  std::ostringstream sa, sb;
  write_mesh(sa, a);
  write_mesh(sb, b);
  CHECK(sa.str() == sb.str());
}

TEST_CASE("point locator returns consistent barycentric weights") {
  const TetMesh m = build_mesh(decagon(), level(8, 4, 3));
  const PointLocator loc(m);
  for (std::size_t i = 0; i < m.node_count(); i += 7) {
    const auto l = loc.locate(m.nodes[i]);
    REQUIRE(l.has_value());
    const auto& t = m.tets[l->tet];
    double w = 0.0;
    for (int k = 0; k < 4; ++k) {
      if (t[k] == static_cast<std::int32_t>(i)) w = l->weights[k];
    }
    CHECK(w == doctest::Approx(1.0).epsilon(1e-12));
  }
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(0, 120), uy(0, 60), uz(0, 25);
  for (int k = 0; k < 500; ++k) {
    const Point3 p{ux(rng), uy(rng), uz(rng)};
    const auto l = loc.locate(p);
    REQUIRE(l.has_value());
    Point3 back{0, 0, 0};
    double sum = 0.0;
    for (int j = 0; j < 4; ++j) {
      CHECK(l->weights[j] >= -1e-9);
      sum += l->weights[j];
      for (int a = 0; a < 3; ++a) back[a] += l->weights[j] * m.nodes[m.tets[l->tet][j]][a];
    }
    CHECK(sum == doctest::Approx(1.0));
    for (int a = 0; a < 3; ++a) CHECK(back[a] == doctest::Approx(p[a]).epsilon(1e-10));
  }
  CHECK_FALSE(loc.locate({-1.0, 30.0, 10.0}).has_value());
  CHECK_FALSE(loc.locate({60.0, 30.0, 25.5}).has_value());
}

TEST_CASE("quality report is sane") {
  const QualityReport q = mesh_quality(build_mesh(decagon(), level(18, 8, 5)));
  CHECK(q.min_volume > 0.0);
  CHECK(q.min_dihedral_deg > 0.0);
  CHECK(q.min_dihedral_deg <= q.mean_dihedral_deg);
  std::size_t total = 0;
  for (auto c : q.aspect_histogram) total += c;
  CHECK(total == q.tets);
  CHECK(q.total_volume == doctest::Approx(120.0 * 60.0 * 25.0));
}

}
