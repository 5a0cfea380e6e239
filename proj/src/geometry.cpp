#include "polympc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace polympc {

double norm(Point2 a) { return std::hypot(a.x, a.y); }

namespace {

double signed_area(std::span<const Point2> v) {
  double twice = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    twice += cross(v[i], v[(i + 1) % v.size()]);
  }
  return 0.5 * twice;
}

Point2 outward_normal(Point2 from, Point2 to) {
  const Point2 e = to - from;
  const double len = norm(e);
  return {e.y / len, -e.x / len};
}

std::pair<double, double> project(std::span<const Point2> v, Point2 axis) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Point2& p : v) {
    const double s = dot(p, axis);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return {lo, hi};
}

bool has_separating_edge_axis(std::span<const Point2> owner, std::span<const Point2> other) {
  for (std::size_t i = 0; i < owner.size(); ++i) {
    const Point2 e = owner[(i + 1) % owner.size()] - owner[i];
    const Point2 axis{e.y, -e.x};
    const auto [a_lo, a_hi] = project(owner, axis);
    const auto [b_lo, b_hi] = project(other, axis);
    if (a_hi < b_lo || b_hi < a_lo) return true;
  }
  return false;
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double t = std::clamp(dot(p - a, ab) / dot(ab, ab), 0.0, 1.0);
  return norm(p - (a + t * ab));
}

}  // namespace

ConvexPolygon::ConvexPolygon(std::vector<Point2> vertices) : vertices_(std::move(vertices)) {
  const std::size_t n = vertices_.size();
  if (n < 3) throw GeometryError("polygon needs at least 3 vertices");
  for (const Point2& p : vertices_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw GeometryError("polygon vertex is not finite");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (vertices_[i] == vertices_[j]) throw GeometryError("polygon has repeated vertices");
    }
  }
  const double area = signed_area(vertices_);
  if (std::abs(area) < kDegenerateArea) throw GeometryError("polygon area is degenerate");
  if (area < 0.0) std::reverse(vertices_.begin(), vertices_.end());

  double turning = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 e0 = vertices_[(i + 1) % n] - vertices_[i];
    const Point2 e1 = vertices_[(i + 2) % n] - vertices_[(i + 1) % n];
    const double c = cross(e0, e1);
    // c is twice the area of the triangle spanned by three consecutive vertices
    if (c <= 2.0 * kDegenerateArea) {
      throw GeometryError("polygon is not strictly convex (collinear or reflex vertex)");
    }
    turning += std::atan2(c, dot(e0, e1));
  }
  if (std::abs(turning - 2.0 * std::numbers::pi) > 1e-6) {
    throw GeometryError("polygon is self-intersecting");
  }
}

double ConvexPolygon::area() const { return signed_area(vertices_); }

Point2 ConvexPolygon::centroid() const {
  double cx = 0.0;
  double cy = 0.0;
  double twice_area = 0.0;
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = vertices_[i];
    const Point2 b = vertices_[(i + 1) % n];
    const double w = cross(a, b);
    twice_area += w;
    cx += (a.x + b.x) * w;
    cy += (a.y + b.y) * w;
  }
  return {cx / (3.0 * twice_area), cy / (3.0 * twice_area)};
}

EdgeLine edge_line(Point2 from, Point2 to) {
  const Point2 e = to - from;
  const double len = norm(e);
  if (len * len < kDegenerateArea) throw GeometryError("edge has zero length");
  EdgeLine line;
  line.alpha = -e.y / len;
  line.beta = e.x / len;
  line.gamma = -(line.alpha * from.x + line.beta * from.y);
  return line;
}

std::vector<EdgeLine> edge_lines(const ConvexPolygon& poly) {
  std::vector<EdgeLine> lines;
  lines.reserve(poly.size());
  for (std::size_t i = 0; i < poly.size(); ++i) {
    lines.push_back(edge_line(poly[i], poly[(i + 1) % poly.size()]));
  }
  return lines;
}

SignedDistance min_signed_distance(Point2 p, std::span<const EdgeLine> lines) {
  SignedDistance best{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const double d = lines[i](p);
    if (d < best.distance) best = {d, i};
  }
  return best;
}

SignedDistance min_signed_distance(Point2 p, const ConvexPolygon& poly) {
  // An edge's own endpoints lie on it exactly; the line coefficients alone
  // would leave roundoff of either sign there.
  const auto lines = edge_lines(poly);
  SignedDistance best{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const bool endpoint = p == poly[i] || p == poly[(i + 1) % poly.size()];
    const double d = endpoint ? 0.0 : lines[i](p);
    if (d < best.distance) best = {d, i};
  }
  return best;
}

bool point_in_polygon(Point2 p, const ConvexPolygon& poly) {
  return min_signed_distance(p, poly).distance >= 0.0;
}

bool polygons_intersect(const ConvexPolygon& a, const ConvexPolygon& b) {
  return !has_separating_edge_axis(a.vertices(), b.vertices()) &&
         !has_separating_edge_axis(b.vertices(), a.vertices());
}

double distance_to_polygon(Point2 p, const ConvexPolygon& poly) {
  if (point_in_polygon(p, poly)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    best = std::min(best, point_segment_distance(p, poly[i], poly[(i + 1) % poly.size()]));
  }
  return best;
}

bool polygon_circle_intersect(const ConvexPolygon& poly, const CircleObstacle& circle) {
  return distance_to_polygon(circle.center, poly) <= circle.radius;
}

bool OffsetRegion::contains(Point2 p) const {
  if (point_in_polygon(p, octagon)) return true;
  return std::any_of(corner_circles.begin(), corner_circles.end(), [&](const CornerCircle& c) {
    const Point2 d = p - c.center;
    return dot(d, d) <= c.radius * c.radius;
  });
}

bool is_rectangle(const ConvexPolygon& poly, double tol) {
  if (poly.size() != 4) return false;
  for (std::size_t i = 0; i < 4; ++i) {
    const Point2 e0 = poly[(i + 1) % 4] - poly[i];
    const Point2 e1 = poly[(i + 2) % 4] - poly[(i + 1) % 4];
    if (std::abs(dot(e0, e1)) > tol * norm(e0) * norm(e1)) return false;
  }
  return true;
}

OffsetRegion offset_region(const ConvexPolygon& footprint, double radius) {
  if (!is_rectangle(footprint)) throw GeometryError("offset region requires a rectangular footprint");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw GeometryError("offset radius must be positive");

  const std::size_t n = footprint.size();
  std::vector<Point2> octagon;
  std::vector<CornerCircle> circles;
  octagon.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 prev = footprint[(i + n - 1) % n];
    const Point2 here = footprint[i];
    const Point2 next = footprint[(i + 1) % n];
    octagon.push_back(here + radius * outward_normal(prev, here));
    octagon.push_back(here + radius * outward_normal(here, next));
    circles.push_back({here, radius});
  }
  return OffsetRegion{ConvexPolygon(std::move(octagon)), std::move(circles)};
}

ConvexPolygon make_rectangle(Point2 center, double length, double width, double heading) {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  const double hl = 0.5 * length;
  const double hw = 0.5 * width;
  std::vector<Point2> v;
  for (const auto& [bx, by] : {std::pair{-hl, -hw}, {hl, -hw}, {hl, hw}, {-hl, hw}}) {
    v.push_back({center.x + c * bx - s * by, center.y + s * bx + c * by});
  }
  return ConvexPolygon(std::move(v));
}

}  // namespace polympc
