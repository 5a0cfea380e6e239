#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "polympc/geometry.hpp"

using namespace polympc;

namespace {

ConvexPolygon unit_square() { return ConvexPolygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

ConvexPolygon poly(const oracle::Poly& v) { return ConvexPolygon(v); }

}  // namespace

TEST_CASE("construction re-orients clockwise input and rejects degenerate lists") {
  const ConvexPolygon cw({{0, 0}, {0, 1}, {1, 1}, {1, 0}});
  CHECK(cw.area() == doctest::Approx(1.0));
  for (std::size_t i = 0; i < cw.size(); ++i) {
    const Point2 a = cw[i], b = cw[(i + 1) % 4], c = cw[(i + 2) % 4];
    CHECK(cross(b - a, c - b) > 0.0);
  }
  CHECK_THROWS_AS(ConvexPolygon({{0, 0}, {1, 0}}), GeometryError);
  CHECK_THROWS_AS(ConvexPolygon({{0, 0}, {1, 0}, {2, 0}}), GeometryError);
  CHECK_THROWS_AS(ConvexPolygon({{0, 0}, {1, 0}, {1, 0}, {0, 1}}), GeometryError);
  CHECK_THROWS_AS(ConvexPolygon({{0, 0}, {2, 0}, {1, 0.5}, {1, 2}}), GeometryError);  // reflex
  CHECK_THROWS_AS(ConvexPolygon({{0, 0}, {1, 0}, {2, 0}, {1, 1}}), GeometryError);   // collinear triple
}

TEST_CASE("edge lines of the unit square") {
  const auto lines = edge_lines(unit_square());
  REQUIRE(lines.size() == 4);
  CHECK(lines[0].alpha == doctest::Approx(0.0));
  CHECK(lines[0].beta == doctest::Approx(1.0));
  CHECK(lines[0].gamma == doctest::Approx(0.0));
  CHECK(lines[1].alpha == doctest::Approx(-1.0));
  CHECK(lines[1].beta == doctest::Approx(0.0));
  CHECK(lines[1].gamma == doctest::Approx(1.0));
}

TEST_CASE("edge lines are unit, interior-positive and pass through their vertices") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const ConvexPolygon p = poly(oracle::random_convex(rng, {0, 0}, 2.0, 12));
    const auto lines = edge_lines(p);
    const Point2 c = p.centroid();
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const EdgeLine& l = lines[i];
      CHECK(std::abs(l.alpha * l.alpha + l.beta * l.beta - 1.0) <= 1e-12);
      CHECK(l(c) > 0.0);
      CHECK(std::abs(l(p[i])) <= 1e-12);
      CHECK(std::abs(l(p[(i + 1) % p.size()])) <= 1e-12);
    }
  }
}

TEST_CASE("minimum signed distance examples") {
  const ConvexPolygon sq = unit_square();
  CHECK(min_signed_distance({0.5, 0.5}, sq).distance == doctest::Approx(0.5));
  const SignedDistance out = min_signed_distance({2.0, 0.5}, sq);
  CHECK(out.distance == doctest::Approx(-1.0));
  CHECK(out.edge == 1);
  CHECK(min_signed_distance({1.0, 0.5}, sq).distance == doctest::Approx(0.0).epsilon(1e-15));
  // The centre is equidistant to all four edges: the lowest index wins.
  CHECK(min_signed_distance({0.5, 0.5}, sq).edge == 0);
}

TEST_CASE("point_in_polygon agrees with the sign of the minimum signed distance") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const oracle::Poly v = oracle::random_convex(rng, {0, 0}, 2.0, 10);
    const ConvexPolygon p = poly(v);
    CHECK(point_in_polygon(p.centroid(), p));
    for (const Point2& q : p.vertices()) CHECK(point_in_polygon(q, p));
    for (int i = -30; i <= 30; ++i) {
      for (int j = -30; j <= 30; j += 6) {
        const Point2 q{0.1 * i, 0.1 * j};
        CHECK(point_in_polygon(q, p) == (min_signed_distance(q, p).distance >= 0.0));
      }
    }
    for (int i = 0; i < 200; ++i) {
      const Point2 q{u(rng), u(rng)};
      const bool inside = point_in_polygon(q, p);
      CHECK(inside == (min_signed_distance(q, p).distance >= 0.0));
      if (oracle::strictly_inside(q, v)) CHECK(inside);
    }
  }
  CHECK_FALSE(point_in_polygon({5, 5}, unit_square()));
}

TEST_CASE("polygon intersection examples") {
  const ConvexPolygon sq = unit_square();
  CHECK_FALSE(polygons_intersect(sq, poly(oracle::box(3, 0, 4, 1))));
  CHECK(polygons_intersect(sq, poly(oracle::box(0.5, 0.5, 1.5, 1.5))));
  CHECK(polygons_intersect(sq, poly(oracle::box(1, 0, 2, 1))));  // touching counts

  const oracle::Poly bar_h = oracle::box(-2, -0.5, 2, 0.5);
  const oracle::Poly bar_v = oracle::box(-0.5, -2, 0.5, 2);
  CHECK(polygons_intersect(poly(bar_h), poly(bar_v)));
  CHECK_FALSE(oracle::any_vertex_strictly_inside(bar_h, bar_v));
}

TEST_CASE("intersection matches the oracle, is symmetric and implied by vertex containment") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> off(-3.0, 3.0);
  int overlaps = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const oracle::Poly a = oracle::random_convex(rng, {0, 0}, 1.5, 8);
    const oracle::Poly b = oracle::random_convex(rng, {off(rng), off(rng)}, 1.5, 8);
    const bool hit = polygons_intersect(poly(a), poly(b));
    CHECK(hit == oracle::sat_intersect(a, b));
    CHECK(hit == polygons_intersect(poly(b), poly(a)));
    if (oracle::any_vertex_strictly_inside(a, b)) CHECK(hit);
    overlaps += hit ? 1 : 0;
  }
  CHECK(overlaps > 200);
  CHECK(overlaps < 1800);
}

TEST_CASE("distance and circle intersection") {
  const ConvexPolygon sq = unit_square();
  CHECK(distance_to_polygon({0.5, 0.5}, sq) == 0.0);
  CHECK(distance_to_polygon({3, 0.5}, sq) == doctest::Approx(2.0));
  CHECK(distance_to_polygon({4, 5}, sq) == doctest::Approx(5.0));
  CHECK(polygon_circle_intersect(sq, {{2.0, 0.5}, 1.0}));  // tangent
  CHECK_FALSE(polygon_circle_intersect(sq, {{2.0, 2.0}, 1.0}));
  CHECK(polygon_circle_intersect(sq, {{0.5, 0.5}, 0.1}));  // disc inside
}

TEST_CASE("offset region of the unit square") {
  const OffsetRegion r = offset_region(unit_square(), 1.0);
  const oracle::Poly expected = {{-1, 0}, {0, -1}, {1, -1}, {2, 0}, {2, 1}, {1, 2}, {0, 2}, {-1, 1}};
  REQUIRE(r.octagon.size() == 8);
  for (const Point2& e : expected) {
    bool found = false;
    for (const Point2& v : r.octagon.vertices()) found = found || (std::abs(v.x - e.x) < 1e-12 && std::abs(v.y - e.y) < 1e-12);
    CHECK(found);
  }
  CHECK(r.corner_circles.size() == 4);
  CHECK_THROWS_AS(offset_region(ConvexPolygon({{0, 0}, {2, 0}, {1, 1}}), 1.0), GeometryError);
}

TEST_CASE("small offsets shrink the octagon onto the rectangle") {
  const ConvexPolygon sq = unit_square();
  const OffsetRegion r = offset_region(sq, 1e-9);
  for (const Point2& v : r.octagon.vertices()) {
    double nearest = 1e9;
    for (const Point2& c : sq.vertices()) nearest = std::min(nearest, norm(v - c));
    CHECK(nearest < 1e-8);
  }
}

TEST_CASE("offset region membership equals distance to the rectangle within the radius") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.5, 5.5);
  const double r = 0.9;
  const ConvexPolygon rect = poly(oracle::box(0, 0, 3, 1.4));
  const OffsetRegion region = offset_region(rect, r);
  int mismatches = 0;
  int inside = 0;
  for (int i = 0; i < 10000; ++i) {
    const Point2 p{u(rng), u(rng) - 1.5};
    const double d = oracle::distance_to_box(p, 0, 0, 3, 1.4);
    if (std::abs(d - r) < 1e-9) continue;  // boundary
    const bool expect = d <= r;
    inside += expect ? 1 : 0;
    mismatches += region.contains(p) == expect ? 0 : 1;
  }
  CHECK(mismatches == 0);
  CHECK(inside > 1000);
}

TEST_CASE("rotated rectangle helper") {
  const ConvexPolygon r = make_rectangle({1, 2}, 4, 2, std::numbers::pi / 2);
  CHECK(is_rectangle(r));
  CHECK(r.area() == doctest::Approx(8.0));
  CHECK(point_in_polygon({1, 3.9}, r));
  CHECK_FALSE(point_in_polygon({2.5, 2}, r));
}
