#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "polympc/audit.hpp"
#include "polympc/constraints.hpp"
#include "polympc/vehicle.hpp"

using namespace polympc;

namespace {

constexpr double kEps = 1e-6;

Eigen::VectorXd flatten(const oracle::Poly& a, const oracle::Poly& b) {
  Eigen::VectorXd z(2 * (a.size() + b.size()));
  int i = 0;
  for (const Point2& p : a) z(i++) = p.x, z(i++) = p.y;
  for (const Point2& p : b) z(i++) = p.x, z(i++) = p.y;
  return z;
}

oracle::Poly unflatten(const Eigen::VectorXd& z, int offset, int count) {
  oracle::Poly out;
  for (int i = 0; i < count; ++i) out.push_back({z(offset + 2 * i), z(offset + 2 * i + 1)});
  return out;
}

// Gap between the two smallest signed edge distances of p against a CCW polygon.
double tie_gap(Point2 p, const oracle::Poly& ccw) {
  std::vector<double> d;
  for (std::size_t i = 0; i < ccw.size(); ++i) {
    const Point2 a = ccw[i], b = ccw[(i + 1) % ccw.size()];
    d.push_back(((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)) / std::hypot(b.x - a.x, b.y - a.y));
  }
  std::sort(d.begin(), d.end());
  return d[1] - d[0];
}

}  // namespace

TEST_CASE("separating-line residual example") {
  const oracle::Poly ego = oracle::box(2, 0, 3, 1);
  const oracle::Poly obs = oracle::box(0, 0, 1, 1);
  const LabeledVertices verts = LabeledVertices::from(ego, obs);
  REQUIRE(verts.points.size() == 8);
  const ConstraintResiduals r = svm_residuals(verts, {-1, 0, 1.5}, kEps);
  for (int k = 0; k < 8; ++k) {
    const double x = verts.points[k].x;
    const double expected = (x == 2 || x == 1 ? 0.5 : 1.5) - kEps;
    CHECK(verts.labels[k] == (k < 4 ? -1 : 1));
    CHECK(r.values(k) == doctest::Approx(expected).epsilon(1e-15));
  }
  CHECK(r.feasible());

  const ConstraintResiduals zero = svm_residuals(verts, {0, 0, 0}, kEps);
  for (int k = 0; k < 8; ++k) CHECK(zero.values(k) == -kEps);
  CHECK_FALSE(zero.feasible());
}

TEST_CASE("regulariser") {
  CHECK(svm_regularizer({0, 0, 5}).value == 0.0);
  CHECK(svm_regularizer({3, 4, 0}, 1e-4).value == doctest::Approx(2.5e-3));
  const LineRegularizer g = svm_regularizer({1, 0, 0}, 1e-4);
  CHECK(g.gradient(0) == doctest::Approx(2e-4));
  CHECK(g.gradient(1) == 0.0);
  CHECK(g.gradient(2) == 0.0);
}

TEST_CASE("separating-line residual Jacobian matches central differences") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const oracle::Poly a = oracle::random_convex(rng, {0, 0}, 1.0, 7);
    const oracle::Poly b = oracle::random_convex(rng, {3, 1}, 1.0, 7);
    Eigen::VectorXd z(3 + 2 * (a.size() + b.size()));
    z << u(rng), u(rng), u(rng), flatten(a, b);
    const int na = static_cast<int>(a.size()), nb = static_cast<int>(b.size());
    auto f = [&](const Eigen::VectorXd& w) {
      const LabeledVertices v = LabeledVertices::from(unflatten(w, 3, na), unflatten(w, 3 + 2 * na, nb));
      return Eigen::VectorXd(svm_residuals(v, {w(0), w(1), w(2)}, kEps).values);
    };
    const LabeledVertices v = LabeledVertices::from(a, b);
    const ConstraintResiduals r = svm_residuals(v, {z(0), z(1), z(2)}, kEps);
    CHECK(oracle::max_rel_error(oracle::central_jacobian(f, z), r.jacobian) < 1e-6);
  }
}

TEST_CASE("scaling a feasible line keeps it feasible") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int feasible = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const LabeledVertices v =
        LabeledVertices::from(oracle::random_convex(rng, {0, 0}, 1.0, 6), oracle::random_convex(rng, {2.5, 0}, 1.0, 6));
    const SeparatingLine line{1 + 0.3 * u(rng), 0.3 * u(rng), -1.25 + 0.3 * u(rng)};
    const bool ok = svm_residuals(v, line, kEps).feasible();
    feasible += ok ? 1 : 0;
    for (double t : {1.0, 1.5, 10.0, 1e3}) {
      CHECK(svm_residuals(v, {t * line.a, t * line.b, t * line.c}, kEps).feasible() >= ok);
    }
  }
  CHECK(feasible > 0);
}

TEST_CASE("a line with all residuals non-negative certifies disjointness") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int certified = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    const oracle::Poly a = oracle::random_convex(rng, {0, 0}, 1.0, 6);
    const oracle::Poly b = oracle::random_convex(rng, {1.5 + u(rng), u(rng)}, 1.0, 6);
    const SeparatingLine line{1 + 0.5 * u(rng), 0.5 * u(rng), -1.0 + u(rng)};
    if (svm_residuals(LabeledVertices::from(a, b), line, kEps).feasible()) {
      ++certified;
      CHECK_FALSE(oracle::sat_intersect(a, b));
    }
  }
  CHECK(certified > 50);
}

TEST_CASE("separation subproblem finds a line for disjoint squares") {
  const ConvexPolygon a(oracle::box(0, 0, 1, 1));
  const ConvexPolygon b(oracle::box(3, 0.5, 4, 1.5));
  const SeparationResult r = svm_separate(a, b);
  CHECK(r.solve.status == SolveStatus::Converged);
  CHECK(r.separable);
  CHECK(svm_residuals(LabeledVertices::from(a.vertices(), b.vertices()), r.line, kEps).feasible());
  CHECK_FALSE(svm_separate(a, ConvexPolygon(oracle::box(0.5, 0.5, 2, 2))).separable);
}

TEST_CASE("separation subproblem agrees with the oracle on random disjoint and overlapping pairs") {
  int disjoint = 0;
  for (const PolygonPair& p : random_polygon_pairs(99, 200)) {
    const bool hit = oracle::sat_intersect(oracle::vertices(p.ego), oracle::vertices(p.obstacle));
    disjoint += hit ? 0 : 1;
    CHECK(svm_separate(p.ego, p.obstacle).separable == !hit);
  }
  CHECK(disjoint > 40);
  CHECK(disjoint < 160);
}

TEST_CASE("minimum signed distance residual examples") {
  const ConvexPolygon sq(oracle::box(0, 0, 1, 1));
  const ConstraintResiduals far = msde_residuals(sq, ConvexPolygon(oracle::box(4, 0, 5, 1)));
  REQUIRE(far.values.size() == 8);
  CHECK(far.values.minCoeff() >= 2.0);

  const ConstraintResiduals in = msde_residuals(ConvexPolygon({{0.5, 0.5}, {-1, 0}, {-1, 1}}), sq);
  CHECK(in.values.minCoeff() == doctest::Approx(-0.5));

  const ConstraintResiduals cross =
      msde_residuals(ConvexPolygon(oracle::box(-2, -0.5, 2, 0.5)), ConvexPolygon(oracle::box(-0.5, -2, 0.5, 2)));
  CHECK(cross.values.minCoeff() > 0.0);
}

TEST_CASE("residuals are non-negative exactly when no vertex is strictly inside the other polygon") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> off(-2.5, 2.5);
  int contained = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const oracle::Poly a = oracle::random_convex(rng, {0, 0}, 1.5, 8);
    const oracle::Poly b = oracle::random_convex(rng, {off(rng), off(rng)}, 1.0, 8);
    const bool inside = oracle::any_vertex_strictly_inside(a, b);
    contained += inside ? 1 : 0;
    CHECK(msde_residuals(ConvexPolygon(a), ConvexPolygon(b)).feasible() == !inside);
  }
  CHECK(contained > 200);
}

TEST_CASE("minimum signed distance Jacobian matches central differences away from ties") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> off(-2.5, 2.5);
  int rows = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const ConvexPolygon pa(oracle::random_convex(rng, {0, 0}, 1.5, 7));
    const ConvexPolygon pb(oracle::random_convex(rng, {off(rng), off(rng)}, 1.0, 7));
    const oracle::Poly a = oracle::vertices(pa), b = oracle::vertices(pb);
    const int na = static_cast<int>(a.size()), nb = static_cast<int>(b.size());
    auto f = [&](const Eigen::VectorXd& w) {
      return Eigen::VectorXd(
          msde_residuals(ConvexPolygon(unflatten(w, 0, na)), ConvexPolygon(unflatten(w, 2 * na, nb))).values);
    };
    const Eigen::VectorXd z = flatten(a, b);
    const ConstraintResiduals r = msde_residuals(pa, pb);
    const Eigen::MatrixXd fd = oracle::central_jacobian(f, z);
    for (int k = 0; k < na + nb; ++k) {
      const double gap = k < na ? tie_gap(a[k], b) : tie_gap(b[k - na], a);
      if (gap < 1e-6) continue;
      ++rows;
      CHECK(oracle::max_rel_error(fd.row(k), r.jacobian.row(k)) < 1e-6);
    }
  }
  CHECK(rows > 1500);
}

TEST_CASE("circle residual examples") {
  const ConvexPolygon fp(oracle::box(0, 0, 2, 1));
  const double r = 0.5;
  const OffsetRegion region = offset_region(fp, r);

  const ConstraintResiduals far = circle_residuals(fp, region, {{11, 0.5}, r}, Method::Msde);
  REQUIRE(far.values.size() == 5);
  for (int i = 0; i < 4; ++i) CHECK(far.values(i) >= 80.0);
  CHECK(far.values(4) > 0.0);

  const ConstraintResiduals corner = circle_residuals(fp, region, {{2, 1}, r}, Method::Msde);
  CHECK(corner.values.head(4).minCoeff() == doctest::Approx(-r * r));

  const ConstraintResiduals edge = circle_residuals(fp, region, {{1, -0.5}, r}, Method::Msde);
  for (int i = 0; i < 4; ++i) CHECK(edge.values(i) > 0.0);
  CHECK(edge.values(4) == doctest::Approx(0.0).epsilon(1e-12));

  const ConstraintResiduals svm = circle_residuals(fp, region, {{11, 0.5}, r}, Method::Svm, SeparatingLine{1, 0, -6});
  CHECK(svm.values.size() == 4 + 8 + 1);
  CHECK(svm.feasible());

  CHECK_THROWS_AS(circle_residuals(fp, region, {{11, 0.5}, 0.7}, Method::Msde), GeometryError);
  CHECK_THROWS_AS(circle_residuals(fp, region, {{11, 0.5}, r}, Method::Svm), std::invalid_argument);
}

TEST_CASE("pose residual gradients and Hessians match differences of values and gradients") {
  const VehicleParams params;
  const auto body_pts = footprint_body(params);
  const BodyShape ego = BodyShape::from(ConvexPolygon(std::vector<Point2>(body_pts.begin(), body_pts.end())));
  const ObstacleShape obs(ConvexPolygon(oracle::box(4, -1, 6, 2)));
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double h = 1e-6;
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const LocalVector z = (LocalVector() << 1 + u(rng), u(rng), 0.5 * u(rng), 1 + 0.2 * u(rng), 0.2 * u(rng),
                           -4 + u(rng))
                              .finished();
    auto eval = [&](const LocalVector& w, bool svm) {
      std::vector<LocalResidual> out;
      const Pose2 pose{w(0), w(1), w(2)};
      if (svm) svm_pose_residuals(ego, pose, obs.polygon.vertices(), {w(3), w(4), w(5)}, kEps, out);
      else msde_pose_residuals(ego, pose, obs, out);
      return out;
    };
    for (bool svm : {true, false}) {
      const auto base = eval(z, svm);
      // Rows whose argmin changes inside the stencil have no classical derivative.
      std::vector<bool> smooth(base.size(), true);
      for (int j = 0; j < kLocalVars; ++j) {
        for (double s : {-h, h}) {
          LocalVector w = z;
          w(j) += s;
          const auto moved = eval(w, svm);
          for (std::size_t k = 0; k < base.size(); ++k) {
            const double lin = base[k].value + s * base[k].grad(j);
            if (std::abs(moved[k].value - lin) > 1e-9) smooth[k] = false;
          }
        }
      }
      for (int j = 0; j < kLocalVars; ++j) {
        LocalVector zp = z, zm = z;
        zp(j) += h;
        zm(j) -= h;
        const auto p = eval(zp, svm), m = eval(zm, svm);
        for (std::size_t k = 0; k < base.size(); ++k) {
          if (!smooth[k]) continue;
          ++checked;
          const double g = (p[k].value - m[k].value) / (2 * h);
          CHECK(std::abs(g - base[k].grad(j)) / std::max(1.0, std::abs(base[k].grad(j))) < 1e-6);
          const LocalVector hcol = (p[k].grad - m[k].grad) / (2 * h);
          for (int i = 0; i < kLocalVars; ++i) {
            CHECK(std::abs(hcol(i) - base[k].hess(i, j)) / std::max(1.0, std::abs(base[k].hess(i, j))) < 1e-5);
          }
        }
      }
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("method names") {
  CHECK(parse_method("SVM") == Method::Svm);
  CHECK(parse_method("msde") == Method::Msde);
  CHECK(to_string(Method::Msde) == "msde");
  CHECK_THROWS_AS(parse_method("obca"), std::invalid_argument);
}
