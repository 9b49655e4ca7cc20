#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "support.hpp"
#include "thermo/errors.hpp"
#include "thermo/geometry.hpp"

using namespace thermo;

TEST_SUITE("geometry") {

TEST_CASE("regular polygon has the requested area for every n") {
  for (int n = 3; n <= 100; ++n) {
    const Polygon2D p = regular_polygon(n, 400.0);
    REQUIRE(p.vertices.size() == static_cast<std::size_t>(n));
    CHECK(std::abs(testing::fan_area(p) - 400.0) / 400.0 < 1e-12);
    CHECK(std::abs(shoelace_area(p) - 400.0) / 400.0 < 1e-12);
  }
}

TEST_CASE("square of area 400 has circumradius 10 sqrt 2 and a vertex on +y") {
  const Polygon2D p = regular_polygon(4, 400.0);
  CHECK(p.vertices[0].x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p.vertices[0].y == doctest::Approx(10.0 * std::sqrt(2.0)).epsilon(1e-12));
  for (const auto& v : p.vertices) CHECK(std::hypot(v.x, v.y) == doctest::Approx(std::sqrt(200.0)));
}

TEST_CASE("star outer radius follows the kite area formula") {
  // Each wing is a kite of area R_o * r * sin(pi/n); n wings make the polygon.
  CHECK(star_outer_radius(3, 10.0, 400.0) == doctest::Approx(400.0 / (3 * 10.0 * std::sin(M_PI / 3))));
  CHECK(star_outer_radius(3, 10.0, 400.0) == doctest::Approx(15.396).epsilon(1e-4));
  CHECK(star_outer_radius(100, 10.0, 400.0) == doctest::Approx(12.73).epsilon(1e-3));
  double prev = 1e9;
  for (int n = 3; n <= 100; ++n) {
    const double r = star_outer_radius(n, 10.0, 400.0);
    CHECK(r < prev);
    prev = r;
    const Polygon2D s = star_polygon(n, 10.0, 400.0);
    REQUIRE(s.vertices.size() == static_cast<std::size_t>(2 * n));
    CHECK(std::abs(testing::fan_area(s) - 400.0) / 400.0 < 1e-12);
  }
}

TEST_CASE("star at the feasibility boundary is the regular 2n-gon") {
  const int n = 6;
  const double r = 10.0;
  const double area = n * r * r * std::sin(M_PI / n);
  const Polygon2D s = star_polygon(n, r, area);
  const Polygon2D g = regular_polygon(2 * n, area);
  for (const auto& v : s.vertices) CHECK(std::hypot(v.x, v.y) == doctest::Approx(r).epsilon(1e-12));
  // same vertex set up to rotation: every star vertex matches some 2n-gon vertex after rotating by the first offset
  const double rot = std::atan2(s.vertices[0].y, s.vertices[0].x) - std::atan2(g.vertices[0].y, g.vertices[0].x);
  for (const auto& v : g.vertices) {
    const double x = v.x * std::cos(rot) - v.y * std::sin(rot), y = v.x * std::sin(rot) + v.y * std::cos(rot);
    double best = 1e9;
    for (const auto& w : s.vertices) best = std::min(best, std::hypot(w.x - x, w.y - y));
    CHECK(best < 1e-9);
  }
}

TEST_CASE("polygons are invariant under rotation by 2 pi / n") {
  for (ShapeFamily f : {ShapeFamily::RegularPolygon, ShapeFamily::StarPolygon}) {
    for (int n : {3, 5, 12, 37}) {
      TumorShape shape;
      shape.family = f;
      shape.n = n;
      const Polygon2D p = base_polygon(shape);
      const double a = 2 * M_PI / n;
      for (const auto& v : p.vertices) {
        const double x = v.x * std::cos(a) - v.y * std::sin(a), y = v.x * std::sin(a) + v.y * std::cos(a);
        double best = 1e9;
        for (const auto& w : p.vertices) best = std::min(best, std::hypot(w.x - x, w.y - y));
        CHECK(best < 1e-12 * 100);
      }
    }
  }
}

TEST_CASE("invalid shapes are rejected") {
  CHECK_THROWS_AS(regular_polygon(2, 400.0), ParameterError);
  CHECK_THROWS_AS(regular_polygon(5, -1.0), ParameterError);
  // area below n r^2 sin(pi/n) would need an outer radius smaller than the inner one
  CHECK_THROWS_AS(star_polygon(5, 10.0, 100.0), ParameterError);
  CHECK_THROWS_AS(parse_family("circle"), ParameterError);
  CHECK(parse_family("star") == ShapeFamily::StarPolygon);
  CHECK(family_name(ShapeFamily::RegularPolygon) == "polygon");
}

TEST_CASE("prism placement") {
  TumorShape shape;
  shape.family = ShapeFamily::StarPolygon;
  shape.n = 3;
  const GeometrySpec g = place_prism(shape, TissueDims{});
  CHECK(g.z_bottom == doctest::Approx(5.0));
  CHECK(g.z_top == doctest::Approx(13.0));
  CHECK(g.center.x == doctest::Approx(60.0));
  CHECK(g.center.y == doctest::Approx(30.0));
  CHECK(max_vertex_radius(g.base) == doctest::Approx(15.396).epsilon(1e-4));

  TumorShape big;
  big.n = 4;
  big.base_area = 2.0 * 31.0 * 31.0;  // square with circumradius 31 exceeds the 30 mm half-depth
  CHECK_THROWS_AS(place_prism(big, TissueDims{}), PlacementError);
  TumorShape deep;
  deep.top_depth = 20.0;  // prism would leave the block through the bottom
  CHECK_THROWS_AS(place_prism(deep, TissueDims{}), PlacementError);
  CHECK_FALSE(empty_block(TissueDims{}).has_tumor());
}

TEST_CASE("point in polygon matches the winding number oracle") {
  std::mt19937_64 rng(7);
  for (ShapeFamily f : {ShapeFamily::RegularPolygon, ShapeFamily::StarPolygon}) {
    for (int n : {3, 4, 7, 25, 100}) {
      TumorShape shape;
      shape.family = f;
      shape.n = n;
      const Polygon2D p = base_polygon(shape);
      const double r = max_vertex_radius(p);
      std::uniform_real_distribution<double> u(-1.2 * r, 1.2 * r);
      for (int k = 0; k < 2000; ++k) {
        const Vec2 q{u(rng), u(rng)};
        CHECK(point_in_polygon(q, p) == (testing::winding_number(q, p) != 0));
      }
      CHECK(point_in_polygon({0.0, 0.0}, p));
      CHECK_FALSE(point_in_polygon({2.0 * r, 0.0}, p));
    }
  }
}

TEST_CASE("boundary points count as inside") {
  const Polygon2D sq{{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}};
  CHECK(point_in_polygon({1.0, 0.0}, sq));
  CHECK(point_in_polygon({0.0, -1.0}, sq));
  CHECK(point_in_polygon({1.0, 1.0}, sq));
  CHECK_FALSE(point_in_polygon({1.0 + 1e-6, 0.0}, sq));
}

TEST_CASE("clipped areas partition the polygon") {
  for (ShapeFamily f : {ShapeFamily::RegularPolygon, ShapeFamily::StarPolygon}) {
    TumorShape shape;
    shape.family = f;
    shape.n = 7;
    const Polygon2D p = base_polygon(shape);
    double sum = 0.0;
    for (int i = 0; i < 9; ++i) {
      for (int j = 0; j < 7; ++j) {
        const double x0 = -20.0 + 40.0 * i / 9.0, x1 = -20.0 + 40.0 * (i + 1) / 9.0;
        const double y0 = -20.0 + 40.0 * j / 7.0, y1 = -20.0 + 40.0 * (j + 1) / 7.0;
        const double a = clipped_area(p, x0, x1, y0, y1);
        CHECK(a >= 0.0);
        CHECK(a <= (x1 - x0) * (y1 - y0) * (1 + 1e-12));
        sum += a;
      }
    }
    CHECK(sum == doctest::Approx(400.0).epsilon(1e-10));
    CHECK(clipped_area(p, 100, 101, 100, 101) == 0.0);
  }
}

TEST_CASE("polygon CSV lists one vertex per row") {
  std::ostringstream out;
  write_polygon_csv(out, regular_polygon(5, 400.0));
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "x_mm,y_mm");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 5);
}

}
