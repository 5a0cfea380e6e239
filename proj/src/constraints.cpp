#include "polympc/constraints.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

namespace polympc {

std::string_view to_string(Method m) { return m == Method::Svm ? "svm" : "msde"; }

Method parse_method(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "svm") return Method::Svm;
  if (lower == "msde") return Method::Msde;
  throw std::invalid_argument("unknown method '" + std::string(name) + "' (expected svm or msde)");
}

LabeledVertices LabeledVertices::from(std::span<const Point2> ego, std::span<const Point2> obstacle) {
  LabeledVertices out;
  out.points.assign(ego.begin(), ego.end());
  out.points.insert(out.points.end(), obstacle.begin(), obstacle.end());
  out.labels.assign(ego.size(), -1);
  out.labels.resize(out.points.size(), +1);
  return out;
}

ConstraintResiduals svm_residuals(const LabeledVertices& verts, const SeparatingLine& line, double eps) {
  const auto n = static_cast<Eigen::Index>(verts.points.size());
  ConstraintResiduals r;
  r.values.resize(n);
  r.jacobian = Eigen::MatrixXd::Zero(n, 3 + 2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Point2 p = verts.points[static_cast<std::size_t>(k)];
    const double q = verts.labels[static_cast<std::size_t>(k)];
    r.values(k) = q * line(p) - eps;
    r.jacobian(k, 0) = q * p.x;
    r.jacobian(k, 1) = q * p.y;
    r.jacobian(k, 2) = q;
    r.jacobian(k, 3 + 2 * k) = q * line.a;
    r.jacobian(k, 4 + 2 * k) = q * line.b;
  }
  return r;
}

LineRegularizer svm_regularizer(const SeparatingLine& line, double alpha) {
  LineRegularizer reg;
  reg.value = alpha * (line.a * line.a + line.b * line.b);
  reg.gradient = {2.0 * alpha * line.a, 2.0 * alpha * line.b, 0.0};
  return reg;
}

SeparatingLine initial_separating_line(Point2 ego_centroid, Point2 obstacle_centroid) {
  Point2 n = obstacle_centroid - ego_centroid;
  const double len = norm(n);
  n = len > 0.0 ? (1.0 / len) * n : Point2{1.0, 0.0};
  const Point2 mid = 0.5 * (ego_centroid + obstacle_centroid);
  return {n.x, n.y, -dot(n, mid)};
}

namespace {

// Gradient of the normalized edge-line value l(p) for the edge a -> b.
struct EdgeLineGradient {
  double value;
  Point2 d_from;
  Point2 d_to;
  Point2 d_point;
};

EdgeLineGradient edge_line_gradient(Point2 a, Point2 b, Point2 p) {
  const Point2 e = b - a;
  const Point2 w = p - a;
  const double len = norm(e);
  const double h = cross(e, w);
  const Point2 dh_dp{-e.y, e.x};
  const Point2 dh_de{w.y, -w.x};
  const Point2 dlen_db = (1.0 / len) * e;
  EdgeLineGradient g;
  g.value = h / len;
  g.d_point = (1.0 / len) * dh_dp;
  g.d_to = (1.0 / len) * dh_de - (h / (len * len)) * dlen_db;
  g.d_from = (-1.0 / len) * (dh_de + dh_dp) + (h / (len * len)) * dlen_db;
  return g;
}

// -min_i l_i(p) for p against polygon `poly`, with the derivative written into
// the polygon vertex columns (offset `poly_col`) and point columns (`point_col`).
void msde_row(const ConvexPolygon& poly, Point2 p, Eigen::Index row, Eigen::Index poly_col,
              Eigen::Index point_col, ConstraintResiduals& r) {
  const auto lines = edge_lines(poly);
  const SignedDistance sd = min_signed_distance(p, lines);
  const std::size_t i = sd.edge;
  const std::size_t j = (i + 1) % poly.size();
  const EdgeLineGradient g = edge_line_gradient(poly[i], poly[j], p);
  r.values(row) = -sd.distance;
  r.jacobian(row, poly_col + 2 * static_cast<Eigen::Index>(i)) -= g.d_from.x;
  r.jacobian(row, poly_col + 2 * static_cast<Eigen::Index>(i) + 1) -= g.d_from.y;
  r.jacobian(row, poly_col + 2 * static_cast<Eigen::Index>(j)) -= g.d_to.x;
  r.jacobian(row, poly_col + 2 * static_cast<Eigen::Index>(j) + 1) -= g.d_to.y;
  r.jacobian(row, point_col) -= g.d_point.x;
  r.jacobian(row, point_col + 1) -= g.d_point.y;
}

}  // namespace

ConstraintResiduals msde_residuals(const ConvexPolygon& ego, const ConvexPolygon& obs) {
  const auto n_ego = static_cast<Eigen::Index>(ego.size());
  const auto n_obs = static_cast<Eigen::Index>(obs.size());
  const Eigen::Index n = n_ego + n_obs;
  ConstraintResiduals r;
  r.values.resize(n);
  r.jacobian = Eigen::MatrixXd::Zero(n, 2 * n);
  const Eigen::Index obs_col = 2 * n_ego;
  for (Eigen::Index j = 0; j < n_ego; ++j) {
    msde_row(obs, ego[static_cast<std::size_t>(j)], j, obs_col, 2 * j, r);
  }
  for (Eigen::Index j = 0; j < n_obs; ++j) {
    msde_row(ego, obs[static_cast<std::size_t>(j)], n_ego + j, 0, obs_col + 2 * j, r);
  }
  return r;
}

ConstraintResiduals circle_residuals(const ConvexPolygon& footprint, const OffsetRegion& region,
                                     const CircleObstacle& obs, Method method,
                                     std::optional<SeparatingLine> line, double eps) {
  for (const CornerCircle& c : region.corner_circles) {
    if (std::abs(c.radius - obs.radius) > 1e-12) {
      throw GeometryError("offset region radius does not match the obstacle radius");
    }
  }
  if (region.corner_circles.size() != footprint.size()) {
    throw GeometryError("offset region was not built from this footprint");
  }
  if (method == Method::Svm && !line) throw std::invalid_argument("SVM circle residuals need a line");

  const auto n_fp = static_cast<Eigen::Index>(footprint.size());
  const auto n_oct = static_cast<Eigen::Index>(region.octagon.size());
  const Eigen::Index oct_col = 2 * n_fp;
  const Eigen::Index center_col = oct_col + 2 * n_oct;
  const Eigen::Index line_col = center_col + 2;
  const Eigen::Index n_rows = n_fp + (method == Method::Msde ? 1 : n_oct + 1);
  const Eigen::Index n_cols = center_col + 2 + (method == Method::Svm ? 3 : 0);

  ConstraintResiduals r;
  r.values.resize(n_rows);
  r.jacobian = Eigen::MatrixXd::Zero(n_rows, n_cols);
  const Point2 c = obs.center;
  for (Eigen::Index i = 0; i < n_fp; ++i) {
    const Point2 d = footprint[static_cast<std::size_t>(i)] - c;
    r.values(i) = dot(d, d) - obs.radius * obs.radius;
    r.jacobian(i, 2 * i) = 2.0 * d.x;
    r.jacobian(i, 2 * i + 1) = 2.0 * d.y;
    r.jacobian(i, center_col) = -2.0 * d.x;
    r.jacobian(i, center_col + 1) = -2.0 * d.y;
  }
  if (method == Method::Msde) {
    msde_row(region.octagon, c, n_fp, oct_col, center_col, r);
    return r;
  }
  const LabeledVertices verts = LabeledVertices::from(region.octagon.vertices(), std::span(&c, 1));
  const ConstraintResiduals s = svm_residuals(verts, *line, eps);
  r.values.tail(n_oct + 1) = s.values;
  // svm columns: [a b c | octagon coords | center]
  r.jacobian.block(n_fp, line_col, n_oct + 1, 3) = s.jacobian.leftCols(3);
  r.jacobian.block(n_fp, oct_col, n_oct + 1, 2 * n_oct + 2) = s.jacobian.rightCols(2 * n_oct + 2);
  return r;
}

// ---------------------------------------------------------------------------

BodyShape BodyShape::from(const ConvexPolygon& body_polygon) {
  BodyShape s;
  s.vertices.assign(body_polygon.vertices().begin(), body_polygon.vertices().end());
  s.lines = edge_lines(body_polygon);
  return s;
}

std::vector<Point2> BodyShape::world_vertices(const Pose2& pose) const {
  std::vector<Point2> out;
  out.reserve(vertices.size());
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  for (const Point2& o : vertices) {
    out.push_back({pose.px + c * o.x - s * o.y, pose.py + s * o.x + c * o.y});
  }
  return out;
}

ObstacleShape::ObstacleShape(ConvexPolygon poly) : polygon(std::move(poly)), lines(edge_lines(polygon)) {}

namespace {

constexpr int kTheta = 2;
constexpr int kA = 3;
constexpr int kB = 4;
constexpr int kC = 5;

// World position of a body point with first and second pose derivatives.
// Only d2/dtheta2 is nonzero among the second derivatives.
struct BodyPoint {
  Point2 p;
  Eigen::Vector3d dx;  // d p.x / d(px, py, theta)
  Eigen::Vector3d dy;
  Point2 ddtheta;
};

BodyPoint body_point(Point2 o, const Pose2& pose, double c, double s) {
  BodyPoint bp;
  const double rx = c * o.x - s * o.y;
  const double ry = s * o.x + c * o.y;
  bp.p = {pose.px + rx, pose.py + ry};
  bp.dx = {1.0, 0.0, -ry};
  bp.dy = {0.0, 1.0, rx};
  bp.ddtheta = {-rx, -ry};
  return bp;
}

// World point q expressed in the body frame, w = R^T (q - p).
struct BodyCoords {
  Point2 w;
  Eigen::Vector3d dwx;
  Eigen::Vector3d dwy;
  Eigen::Matrix3d hwx;
  Eigen::Matrix3d hwy;
};

BodyCoords body_coords(Point2 q, const Pose2& pose, double c, double s) {
  const double dx = q.x - pose.px;
  const double dy = q.y - pose.py;
  BodyCoords b;
  b.w = {c * dx + s * dy, -s * dx + c * dy};
  b.dwx = {-c, -s, b.w.y};
  b.dwy = {s, -c, -b.w.x};
  b.hwx << 0, 0, s,  //
      0, 0, -c,      //
      s, -c, -b.w.x;
  b.hwy << 0, 0, c,  //
      0, 0, s,       //
      c, s, -b.w.y;
  return b;
}

// -min_i l_i(q) for a fixed world point q against a body-frame shape.
LocalResidual point_outside_body(const BodyShape& shape, Point2 q, const Pose2& pose, double c, double s) {
  const BodyCoords b = body_coords(q, pose, c, s);
  const SignedDistance sd = min_signed_distance(b.w, shape.lines);
  const EdgeLine& l = shape.lines[sd.edge];
  LocalResidual r;
  r.value = -sd.distance;
  r.grad.head<3>() = -(l.alpha * b.dwx + l.beta * b.dwy);
  r.hess.topLeftCorner<3, 3>() = -(l.alpha * b.hwx + l.beta * b.hwy);
  return r;
}

// q_k * f(P) - eps for a body point P with line variables (a, b, c).
LocalResidual labeled_body_point(const BodyPoint& bp, double label, const SeparatingLine& line, double eps) {
  LocalResidual r;
  r.value = label * line(bp.p) - eps;
  r.grad.head<3>() = label * (line.a * bp.dx + line.b * bp.dy);
  r.grad(kA) = label * bp.p.x;
  r.grad(kB) = label * bp.p.y;
  r.grad(kC) = label;
  r.hess(kTheta, kTheta) = label * (line.a * bp.ddtheta.x + line.b * bp.ddtheta.y);
  r.hess.block<1, 3>(kA, 0) = label * bp.dx.transpose();
  r.hess.block<1, 3>(kB, 0) = label * bp.dy.transpose();
  r.hess.block<3, 1>(0, kA) = label * bp.dx;
  r.hess.block<3, 1>(0, kB) = label * bp.dy;
  return r;
}

LocalResidual labeled_fixed_point(Point2 p, double label, const SeparatingLine& line, double eps) {
  LocalResidual r;
  r.value = label * line(p) - eps;
  r.grad(kA) = label * p.x;
  r.grad(kB) = label * p.y;
  r.grad(kC) = label;
  return r;
}

}  // namespace

void msde_pose_residuals(const BodyShape& ego, const Pose2& pose, const ObstacleShape& obs,
                         std::vector<LocalResidual>& out) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  for (const Point2& o : ego.vertices) {
    const BodyPoint bp = body_point(o, pose, c, s);
    const SignedDistance sd = min_signed_distance(bp.p, obs.lines);
    const EdgeLine& l = obs.lines[sd.edge];
    LocalResidual r;
    r.value = -sd.distance;
    r.grad.head<3>() = -(l.alpha * bp.dx + l.beta * bp.dy);
    r.hess(kTheta, kTheta) = -(l.alpha * bp.ddtheta.x + l.beta * bp.ddtheta.y);
    out.push_back(r);
  }
  for (const Point2& q : obs.polygon.vertices()) {
    out.push_back(point_outside_body(ego, q, pose, c, s));
  }
}

void svm_pose_residuals(const BodyShape& ego, const Pose2& pose, std::span<const Point2> obstacle_points,
                        const SeparatingLine& line, double eps, std::vector<LocalResidual>& out) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  for (const Point2& o : ego.vertices) {
    out.push_back(labeled_body_point(body_point(o, pose, c, s), -1.0, line, eps));
  }
  for (const Point2& q : obstacle_points) {
    out.push_back(labeled_fixed_point(q, +1.0, line, eps));
  }
}

void circle_pose_residuals(const BodyShape& ego, const BodyShape& octagon, const Pose2& pose,
                           const CircleObstacle& circle, Method method, const SeparatingLine& line,
                           double eps, std::vector<LocalResidual>& out) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  for (const Point2& o : ego.vertices) {
    const BodyPoint bp = body_point(o, pose, c, s);
    const Point2 d = bp.p - circle.center;
    LocalResidual r;
    r.value = dot(d, d) - circle.radius * circle.radius;
    r.grad.head<3>() = 2.0 * (d.x * bp.dx + d.y * bp.dy);
    r.hess.topLeftCorner<3, 3>() = 2.0 * (bp.dx * bp.dx.transpose() + bp.dy * bp.dy.transpose());
    r.hess(kTheta, kTheta) += 2.0 * (d.x * bp.ddtheta.x + d.y * bp.ddtheta.y);
    out.push_back(r);
  }
  if (method == Method::Msde) {
    out.push_back(point_outside_body(octagon, circle.center, pose, c, s));
    return;
  }
  for (const Point2& o : octagon.vertices) {
    out.push_back(labeled_body_point(body_point(o, pose, c, s), -1.0, line, eps));
  }
  out.push_back(labeled_fixed_point(circle.center, +1.0, line, eps));
}

int polygon_residual_count(int n_ego, int n_obs) { return n_ego + n_obs; }

int circle_residual_count(int n_ego, int n_octagon, Method method) {
  return n_ego + (method == Method::Msde ? 1 : n_octagon + 1);
}

}  // namespace polympc
