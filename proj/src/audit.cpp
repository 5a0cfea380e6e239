#include "polympc/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/SparseCore>

#include "polympc/ocp.hpp"

namespace polympc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Points on an ellipse are in convex position; a minimum angular gap keeps
// consecutive vertices from becoming collinear within the degeneracy tolerance.
ConvexPolygon random_convex_polygon(std::mt19937_64& rng, int n, Point2 center) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double ra = 0.5 + 1.5 * unit(rng);
  const double rb = 0.5 + 1.5 * unit(rng);
  const double rot = 2.0 * std::numbers::pi * unit(rng);
  const double min_gap = 0.3 * 2.0 * std::numbers::pi / n;
  std::vector<double> angles;
  while (static_cast<int>(angles.size()) < n) {
    angles.clear();
    for (int i = 0; i < n; ++i) angles.push_back(2.0 * std::numbers::pi * unit(rng));
    std::sort(angles.begin(), angles.end());
    double gap = angles.front() + 2.0 * std::numbers::pi - angles.back();
    for (int i = 1; i < n; ++i) gap = std::min(gap, angles[i] - angles[i - 1]);
    if (gap < min_gap) angles.clear();
  }
  const double c = std::cos(rot);
  const double s = std::sin(rot);
  std::vector<Point2> v;
  for (double a : angles) {
    const double ex = ra * std::cos(a);
    const double ey = rb * std::sin(a);
    v.push_back({center.x + c * ex - s * ey, center.y + s * ex + c * ey});
  }
  return ConvexPolygon(std::move(v));
}

std::vector<double> sorted_edge_values(Point2 p, std::span<const EdgeLine> lines) {
  std::vector<double> d;
  d.reserve(lines.size());
  for (const EdgeLine& l : lines) d.push_back(l(p));
  std::sort(d.begin(), d.end());
  return d;
}

double tie_gap_of(Point2 p, std::span<const EdgeLine> lines) {
  const std::vector<double> d = sorted_edge_values(p, lines);
  return d.size() < 2 ? kInf : d[1] - d[0];
}

// Gap between the two smallest edge values of every inequality row, in the
// row order of the assembled problem; +inf for rows without a minimum.
std::vector<double> row_tie_gaps(const Scenario& sc, const Eigen::VectorXd& z, const VarLayout& layout,
                                 Method method) {
  const auto body = footprint_body(sc.vehicle);
  const ConvexPolygon body_poly(std::vector<Point2>(body.begin(), body.end()));
  std::vector<double> gaps;
  for (int k = 1; k <= layout.horizon; ++k) {
    const VehicleState x = state_at(z, layout, k);
    const ConvexPolygon fp = footprint(x, sc.vehicle);
    const std::vector<EdgeLine> fp_lines = edge_lines(fp);
    for (const Obstacle& o : sc.obstacles) {
      if (const auto* poly = std::get_if<ConvexPolygon>(&o)) {
        if (method == Method::Svm) {
          gaps.insert(gaps.end(), fp.size() + poly->size(), kInf);
          continue;
        }
        const std::vector<EdgeLine> obs_lines = edge_lines(*poly);
        for (const Point2& p : fp.vertices()) gaps.push_back(tie_gap_of(p, obs_lines));
        for (const Point2& p : poly->vertices()) gaps.push_back(tie_gap_of(p, fp_lines));
        continue;
      }
      const auto& circle = std::get<CircleObstacle>(o);
      const ConvexPolygon oct_body = offset_region(body_poly, circle.radius).octagon;
      gaps.insert(gaps.end(), fp.size(), kInf);
      if (method == Method::Svm) {
        gaps.insert(gaps.end(), oct_body.size() + 1, kInf);
        continue;
      }
      std::vector<Point2> oct_world;
      for (const Point2& b : oct_body.vertices()) oct_world.push_back(body_to_world(b, x.px, x.py, x.theta));
      gaps.push_back(tie_gap_of(circle.center, edge_lines(ConvexPolygon(std::move(oct_world)))));
    }
  }
  return gaps;
}

Eigen::MatrixXd dense(int rows, int cols, const std::vector<Triplet>& t) {
  Eigen::SparseMatrix<double> m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return Eigen::MatrixXd(m);
}

}  // namespace

std::vector<PolygonPair> random_polygon_pairs(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> nv(3, 8);
  std::uniform_real_distribution<double> offset(-3.0, 3.0);
  std::vector<PolygonPair> out;
  out.reserve(static_cast<std::size_t>(std::max(0, count)));
  for (int i = 0; i < count; ++i) {
    const int na = nv(rng);
    const int nb = nv(rng);
    ConvexPolygon a = random_convex_polygon(rng, na, {0.0, 0.0});
    const Point2 cb{offset(rng), offset(rng)};
    ConvexPolygon b = random_convex_polygon(rng, nb, cb);
    out.push_back({std::move(a), std::move(b)});
  }
  return out;
}

NlpProblem svm_separation_problem(const ConvexPolygon& ego, const ConvexPolygon& obstacle, double eps,
                                  double alpha) {
  const LabeledVertices verts = LabeledVertices::from(ego.vertices(), obstacle.vertices());
  const int m = static_cast<int>(verts.points.size());
  NlpProblem p;
  p.num_vars = 3;
  p.num_eq = 0;
  p.num_ineq = m;
  p.lower = Eigen::VectorXd::Constant(3, -kInf);
  p.upper = Eigen::VectorXd::Constant(3, kInf);
  p.evaluate = [verts, eps, alpha, m](const Eigen::VectorXd& z, const NlpEvalRequest& req, NlpEvaluation& ev) {
    const SeparatingLine line{z(0), z(1), z(2)};
    const LineRegularizer reg = svm_regularizer(line, alpha);
    const ConstraintResiduals r = svm_residuals(verts, line, eps);
    ev.objective = reg.value;
    ev.gradient = reg.gradient;
    ev.c_eq.resize(0);
    ev.c_ineq = r.values;
    ev.jac_eq.clear();
    ev.jac_ineq.clear();
    ev.hess_lower.clear();
    if (!req.derivatives) return;
    for (int k = 0; k < m; ++k) {
      for (int j = 0; j < 3; ++j) ev.jac_ineq.emplace_back(k, j, r.jacobian(k, j));
    }
    ev.hess_lower.emplace_back(0, 0, 2.0 * alpha * req.objective_scale);
    ev.hess_lower.emplace_back(1, 1, 2.0 * alpha * req.objective_scale);
  };
  return p;
}

SeparationResult svm_separate(const ConvexPolygon& ego, const ConvexPolygon& obstacle, const SolverOptions& options) {
  const NlpProblem p = svm_separation_problem(ego, obstacle);
  const SeparatingLine init = initial_separating_line(ego.centroid(), obstacle.centroid());
  SeparationResult out;
  out.solve = solve(p, Eigen::Vector3d(init.a, init.b, init.c), options);
  out.line = {out.solve.x(0), out.solve.x(1), out.solve.x(2)};
  bool strict = true;
  for (const Point2& v : ego.vertices()) strict = strict && out.line(v) < 0.0;
  for (const Point2& v : obstacle.vertices()) strict = strict && out.line(v) > 0.0;
  out.separable = out.solve.status == SolveStatus::Converged && strict;
  return out;
}

EquivalenceResult polygon_equivalence(std::uint64_t seed, int count, const SolverOptions& options) {
  // A vertex is strictly inside a counter-clockwise polygon when it lies
  // strictly left of every edge.
  auto strictly_inside = [](Point2 p, const ConvexPolygon& poly) {
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point2 a = poly[i];
      const Point2 b = poly[(i + 1) % poly.size()];
      if (cross(b - a, p - a) <= 0.0) return false;
    }
    return true;
  };
  EquivalenceResult out;
  for (const PolygonPair& pair : random_polygon_pairs(seed, count)) {
    ++out.pairs;
    const bool disjoint = !polygons_intersect(pair.ego, pair.obstacle);
    out.disjoint += disjoint ? 1 : 0;
    if (svm_separate(pair.ego, pair.obstacle, options).separable == disjoint) ++out.svm_agree;
    bool contained = false;
    for (const Point2& v : pair.ego.vertices()) contained = contained || strictly_inside(v, pair.obstacle);
    for (const Point2& v : pair.obstacle.vertices()) contained = contained || strictly_inside(v, pair.ego);
    if (msde_residuals(pair.ego, pair.obstacle).feasible() == !contained) ++out.msde_agree;
  }
  return out;
}

int expected_num_vars(int horizon, int num_obstacles, Method method) {
  return 7 * horizon - 2 + (method == Method::Svm ? 3 * num_obstacles * horizon : 0);
}

GradientAuditResult audit_gradients(const Scenario& sc, Method method, int points, std::uint64_t seed,
                                    double step, double tie_gap) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, sc.initial_states.empty() ? 0 : sc.initial_states.size() - 1);
  const VarLayout layout = layout_for(sc, method);
  GradientAuditResult out;
  int point = 0;
  int var = 0;
  auto record = [&](double fd, double an, const char* what, int row) {
    const double err = std::abs(fd - an) / std::max(1.0, std::abs(an));
    if (err > out.max_rel_error) {
      out.max_rel_error = err;
      std::ostringstream os;
      os << what << " row " << row << " var " << var << " point " << point;
      out.worst = os.str();
    }
  };

  for (int pt = 0; pt < points; ++pt) {
    const VehicleState x0 = sc.initial_states.empty() ? sc.x_ref : sc.initial_states[pick(rng)];
    const VehicleInput u_prev{0.3 * unit(rng) * sc.vehicle.v_dot_lim, 0.3 * unit(rng) * sc.vehicle.delta_dot_lim};
    // A reference near the sample keeps the cost small, so that rounding in
    // the summed objective stays well below the tolerance of the difference.
    Scenario local = sc;
    local.x_ref = {x0.px + unit(rng), x0.py + unit(rng), 0.0, x0.theta + 0.5 * unit(rng), 0.0};
    const NlpProblem p = assemble(local, x0, u_prev, method);
    Eigen::VectorXd z = cold_start(local, x0, u_prev, method);
    for (int k = 1; k <= layout.horizon; ++k) {
      const int s = layout.state(k);
      z(s) += 0.3 * unit(rng);
      z(s + 1) += 0.3 * unit(rng);
      z(s + 2) = unit(rng) * sc.vehicle.v_lim;
      z(s + 3) += 0.5 * unit(rng);
      z(s + 4) = unit(rng) * sc.vehicle.delta_lim;
      if (k < layout.horizon) {
        const int u = layout.input(k);
        z(u) = unit(rng) * sc.vehicle.v_dot_lim;
        z(u + 1) = 0.3 * unit(rng) * sc.vehicle.delta_dot_lim;
      }
      for (int o = 0; o < layout.num_lines; ++o) {
        const int l = layout.line(o, k);
        for (int j = 0; j < 3; ++j) z(l + j) += 0.2 * unit(rng);
      }
    }

    NlpEvaluation ev;
    NlpEvalRequest req;
    req.derivatives = true;
    p.evaluate(z, req, ev);
    const Eigen::MatrixXd je = dense(p.num_eq, p.num_vars, ev.jac_eq);
    const Eigen::MatrixXd ji = dense(p.num_ineq, p.num_vars, ev.jac_ineq);
    const std::vector<double> gaps = row_tie_gaps(local, z, layout, method);
    std::vector<bool> skip(gaps.size());
    for (std::size_t r = 0; r < gaps.size(); ++r) {
      skip[r] = gaps[r] < tie_gap;
      if (skip[r]) ++out.excluded_rows;
    }

    NlpEvaluation plus;
    NlpEvaluation minus;
    for (int i = 0; i < p.num_vars; ++i) {
      Eigen::VectorXd zp = z;
      Eigen::VectorXd zm = z;
      zp(i) += step;
      zm(i) -= step;
      p.evaluate(zp, NlpEvalRequest{}, plus);
      p.evaluate(zm, NlpEvalRequest{}, minus);
      point = pt;
      var = i;
      record((plus.objective - minus.objective) / (2.0 * step), ev.gradient(i), "objective", 0);
      for (int r = 0; r < p.num_eq; ++r) {
        record((plus.c_eq(r) - minus.c_eq(r)) / (2.0 * step), je(r, i), "dynamics", r);
      }
      for (int r = 0; r < p.num_ineq; ++r) {
        if (skip[static_cast<std::size_t>(r)]) continue;
        record((plus.c_ineq(r) - minus.c_ineq(r)) / (2.0 * step), ji(r, i), "collision", r);
      }
    }
    ++out.points;
  }
  return out;
}

}  // namespace polympc
