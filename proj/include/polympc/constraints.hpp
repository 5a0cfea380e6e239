#pragma once

#include <Eigen/Core>

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "polympc/geometry.hpp"

namespace polympc {

enum class Method { Svm, Msde };

std::string_view to_string(Method m);
/// Accepts "svm" / "msde" (case-insensitive); throws std::invalid_argument.
Method parse_method(std::string_view name);

inline constexpr double kSvmEpsilon = 1e-6;
inline constexpr double kSvmAlpha = 1e-4;

/// Separating line f(x, y) = a*x + b*y + c, defined up to positive scale.
struct SeparatingLine {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double operator()(Point2 p) const { return a * p.x + b * p.y + c; }
};

/// Ego vertices (label -1) followed by obstacle vertices (label +1).
struct LabeledVertices {
  std::vector<Point2> points;
  std::vector<int> labels;

  static LabeledVertices from(std::span<const Point2> ego, std::span<const Point2> obstacle);
};

/// Feasibility convention: every value >= 0. Jacobian column layout is
/// documented on each producer.
struct ConstraintResiduals {
  Eigen::VectorXd values;
  Eigen::MatrixXd jacobian;

  bool feasible(double tol = 0.0) const { return values.size() == 0 || values.minCoeff() >= -tol; }
};

/// r_k = q_k (a x_k + b y_k + c) - eps.
/// Jacobian columns: [a, b, c, x_0, y_0, x_1, y_1, ...].
ConstraintResiduals svm_residuals(const LabeledVertices& verts, const SeparatingLine& line,
                                  double eps = kSvmEpsilon);

struct LineRegularizer {
  double value = 0.0;
  Eigen::Vector3d gradient = Eigen::Vector3d::Zero();  // w.r.t. (a, b, c)
};

/// alpha (a^2 + b^2).
LineRegularizer svm_regularizer(const SeparatingLine& line, double alpha = kSvmAlpha);

/// Line through the midpoint of the two centroids with unit normal pointing
/// from the ego centroid towards the obstacle centroid.
SeparatingLine initial_separating_line(Point2 ego_centroid, Point2 obstacle_centroid);

/// Per-vertex minimum signed distance constraints, -min_i l_i(p_j) >= 0, for
/// every ego vertex against the obstacle edges followed by every obstacle
/// vertex against the ego edges. Derivatives follow the argmin edge.
/// Jacobian columns: ego vertex coordinates then obstacle vertex coordinates.
ConstraintResiduals msde_residuals(const ConvexPolygon& ego, const ConvexPolygon& obs);

/// Circle avoidance through the offset region of the footprint.
///
/// Values: one quadratic residual |P_i - C|^2 - r^2 per footprint corner,
/// then the octagon exclusion: MSDE gives the single residual
/// -min_i l_i(C) over the octagon edges; SVM gives the labeled-vertex
/// residuals with the octagon vertices as the negative class and C as the
/// sole positive point (requires `line`).
/// Jacobian columns: footprint coords (2 n_fp), octagon coords (2 n_oct),
/// center (2), then (a, b, c) for SVM.
ConstraintResiduals circle_residuals(const ConvexPolygon& footprint, const OffsetRegion& region,
                                     const CircleObstacle& obs, Method method,
                                     std::optional<SeparatingLine> line = std::nullopt,
                                     double eps = kSvmEpsilon);

// ---------------------------------------------------------------------------
// Pose-parameterized residuals used by the optimal control problem. The ego
// shape is rigid and given in its body frame; derivatives are taken w.r.t. the
// local variable vector (px, py, theta, a, b, c).

inline constexpr int kLocalVars = 6;
using LocalVector = Eigen::Matrix<double, kLocalVars, 1>;
using LocalMatrix = Eigen::Matrix<double, kLocalVars, kLocalVars>;

struct Pose2 {
  double px = 0.0;
  double py = 0.0;
  double theta = 0.0;
};

struct LocalResidual {
  double value = 0.0;
  LocalVector grad = LocalVector::Zero();
  LocalMatrix hess = LocalMatrix::Zero();  // symmetric
};

/// Rigid convex shape in the body frame with precomputed edge lines.
struct BodyShape {
  std::vector<Point2> vertices;
  std::vector<EdgeLine> lines;

  static BodyShape from(const ConvexPolygon& body_polygon);
  std::vector<Point2> world_vertices(const Pose2& pose) const;
};

/// Fixed obstacle polygon with precomputed edge lines.
struct ObstacleShape {
  ConvexPolygon polygon;
  std::vector<EdgeLine> lines;

  explicit ObstacleShape(ConvexPolygon poly);
};

void msde_pose_residuals(const BodyShape& ego, const Pose2& pose, const ObstacleShape& obs,
                         std::vector<LocalResidual>& out);

void svm_pose_residuals(const BodyShape& ego, const Pose2& pose, std::span<const Point2> obstacle_points,
                        const SeparatingLine& line, double eps, std::vector<LocalResidual>& out);

/// `octagon` is the body-frame offset region of `ego` for this circle radius.
void circle_pose_residuals(const BodyShape& ego, const BodyShape& octagon, const Pose2& pose,
                           const CircleObstacle& circle, Method method, const SeparatingLine& line,
                           double eps, std::vector<LocalResidual>& out);

/// Residual counts per obstacle and step.
int polygon_residual_count(int n_ego, int n_obs);
int circle_residual_count(int n_ego, int n_octagon, Method method);

}  // namespace polympc
