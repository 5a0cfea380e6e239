#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace polympc {

class GeometryError : public std::invalid_argument {
 public:
  explicit GeometryError(const std::string& what) : std::invalid_argument(what) {}
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point2 a, Point2 b) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
double norm(Point2 a);

/// Area and collinearity threshold below which a polygon is rejected [m^2].
inline constexpr double kDegenerateArea = 1e-12;

/// Strictly convex polygon stored counter-clockwise.
///
/// Construction validates the vertex list and re-orients clockwise input, so
/// every instance satisfies: at least 3 vertices, no repeats, positive
/// signed area, and a strictly positive turn at every vertex.
class ConvexPolygon {
 public:
  explicit ConvexPolygon(std::vector<Point2> vertices);

  std::span<const Point2> vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  const Point2& operator[](std::size_t i) const { return vertices_[i]; }

  double area() const;
  Point2 centroid() const;

 private:
  std::vector<Point2> vertices_;
};

/// Half-plane l(x, y) = alpha*x + beta*y + gamma with a unit normal, so l is a
/// signed distance in meters, positive on the polygon interior side.
struct EdgeLine {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;

  double operator()(Point2 p) const { return alpha * p.x + beta * p.y + gamma; }
};

/// Line through `from` and `to` with the interior on the left of the edge.
EdgeLine edge_line(Point2 from, Point2 to);

/// One line per edge i (through vertex i and i+1), in vertex order.
std::vector<EdgeLine> edge_lines(const ConvexPolygon& poly);

struct SignedDistance {
  double distance = 0.0;
  std::size_t edge = 0;  // argmin edge, lowest index on ties
};

/// min_i l_i(p) over the polygon's edge lines; >= 0 iff p is inside or on it.
SignedDistance min_signed_distance(Point2 p, const ConvexPolygon& poly);
SignedDistance min_signed_distance(Point2 p, std::span<const EdgeLine> lines);

bool point_in_polygon(Point2 p, const ConvexPolygon& poly);

/// Separating-axis test over the edge normals of both polygons. Closed sets:
/// touching polygons intersect.
bool polygons_intersect(const ConvexPolygon& a, const ConvexPolygon& b);

/// Euclidean distance from p to the closed polygon (0 inside).
double distance_to_polygon(Point2 p, const ConvexPolygon& poly);

struct CircleObstacle {
  Point2 center;
  double radius = 0.0;
};

/// Closed disc vs closed polygon.
bool polygon_circle_intersect(const ConvexPolygon& poly, const CircleObstacle& circle);

struct CornerCircle {
  Point2 center;
  double radius = 0.0;
};

/// Footprint grown by a circle radius: octagon plus one disc per corner. The
/// union equals the Minkowski sum of the rectangle and the disc.
struct OffsetRegion {
  ConvexPolygon octagon;
  std::vector<CornerCircle> corner_circles;

  bool contains(Point2 p) const;
};

OffsetRegion offset_region(const ConvexPolygon& footprint, double radius);

/// Rectangle check used by offset_region: 4 vertices with right angles.
bool is_rectangle(const ConvexPolygon& poly, double tol = 1e-9);

ConvexPolygon make_rectangle(Point2 center, double length, double width, double heading = 0.0);

}  // namespace polympc
