#pragma once

// Reference implementations used only by the tests. They share no code with
// the library beyond the Point2 value type.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "polympc/geometry.hpp"

namespace oracle {

using polympc::Point2;
using Poly = std::vector<Point2>;

inline Poly vertices(const polympc::ConvexPolygon& p) { return {p.vertices().begin(), p.vertices().end()}; }

inline Poly box(double x0, double y0, double x1, double y1) { return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}; }

/// Projection of every vertex onto every edge normal of both polygons; closed
/// sets, so touching intervals overlap.
inline bool sat_intersect(const Poly& a, const Poly& b) {
  auto separated_along = [](const Poly& edges, const Poly& p, const Poly& q) {
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const Point2 e = edges[(i + 1) % edges.size()] - edges[i];
      const Point2 n{-e.y, e.x};
      double pmin = std::numeric_limits<double>::infinity(), pmax = -pmin, qmin = pmin, qmax = -pmin;
      for (const Point2& v : p) {
        const double s = n.x * v.x + n.y * v.y;
        pmin = std::min(pmin, s);
        pmax = std::max(pmax, s);
      }
      for (const Point2& v : q) {
        const double s = n.x * v.x + n.y * v.y;
        qmin = std::min(qmin, s);
        qmax = std::max(qmax, s);
      }
      if (pmax < qmin || qmax < pmin) return true;
    }
    return false;
  };
  return !separated_along(a, a, b) && !separated_along(b, a, b);
}

/// Strictly inside a convex polygon of either orientation: the point lies
/// strictly on the same side of every edge.
inline bool strictly_inside(Point2 p, const Poly& poly) {
  int pos = 0;
  int neg = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2 a = poly[i];
    const Point2 b = poly[(i + 1) % poly.size()];
    const double c = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    if (c > 0) ++pos;
    else if (c < 0) ++neg;
  }
  const int n = static_cast<int>(poly.size());
  return pos == n || neg == n;
}

inline bool any_vertex_strictly_inside(const Poly& a, const Poly& b) {
  for (const Point2& v : a) {
    if (strictly_inside(v, b)) return true;
  }
  for (const Point2& v : b) {
    if (strictly_inside(v, a)) return true;
  }
  return false;
}

/// Euclidean distance from p to the axis-aligned box [x0,x1] x [y0,y1].
inline double distance_to_box(Point2 p, double x0, double y0, double x1, double y1) {
  const double dx = std::max({x0 - p.x, 0.0, p.x - x1});
  const double dy = std::max({y0 - p.y, 0.0, p.y - y1});
  return std::hypot(dx, dy);
}

/// Central-difference Jacobian of f at x.
inline Eigen::MatrixXd central_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                        const Eigen::VectorXd& x, double h = 1e-6) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd J(f0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    J.col(j) = (f(xp) - f(xm)) / (2 * h);
  }
  return J;
}

/// max |fd - an| / max(1, |an|) entrywise.
inline double max_rel_error(const Eigen::MatrixXd& fd, const Eigen::MatrixXd& an) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < fd.rows(); ++i) {
    for (Eigen::Index j = 0; j < fd.cols(); ++j) {
      worst = std::max(worst, std::abs(fd(i, j) - an(i, j)) / std::max(1.0, std::abs(an(i, j))));
    }
  }
  return worst;
}

/// Random convex polygon: convex hull (gift wrapping) of random points.
inline Poly random_convex(std::mt19937_64& rng, Point2 center, double radius, int points) {
  std::uniform_real_distribution<double> u(-radius, radius);
  Poly pts;
  for (int i = 0; i < points; ++i) pts.push_back({center.x + u(rng), center.y + u(rng)});
  Poly hull;
  std::size_t start = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].x < pts[start].x) start = i;
  }
  std::size_t cur = start;
  do {
    hull.push_back(pts[cur]);
    std::size_t next = (cur + 1) % pts.size();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Point2 a = pts[cur], b = pts[next], c = pts[i];
      const double cr = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
      if (cr < 0) next = i;
    }
    cur = next;
  } while (cur != start && hull.size() <= pts.size());
  return hull;
}

}  // namespace oracle
