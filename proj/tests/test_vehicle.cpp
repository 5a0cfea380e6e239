#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "polympc/vehicle.hpp"

using namespace polympc;

namespace {

constexpr double kWheelbase = 2.5;

void check_state(const VehicleState& got, const VehicleState& want, double tol = 1e-12) {
  CHECK(got.px == doctest::Approx(want.px).epsilon(tol));
  CHECK(got.py == doctest::Approx(want.py).epsilon(tol));
  CHECK(got.v == doctest::Approx(want.v).epsilon(tol));
  CHECK(got.theta == doctest::Approx(want.theta).epsilon(tol));
  CHECK(got.delta == doctest::Approx(want.delta).epsilon(tol));
}

}  // namespace

TEST_CASE("bicycle step examples") {
  check_state(kbm_step({}, {}, 0.2, kWheelbase), {});
  check_state(kbm_step({0, 0, 1, 0, 0}, {}, 0.2, kWheelbase), {0.2, 0, 1, 0, 0});

  const VehicleState x{1, 2, 1.5, std::numbers::pi / 4, 0.3};
  const VehicleState y = kbm_step(x, {0.5, -0.2}, 0.2, kWheelbase);
  const double c = std::sqrt(0.5);
  check_state(y, {1 + 1.5 * c * 0.2, 2 + 1.5 * c * 0.2, 1.5 + 0.1, std::numbers::pi / 4 + 1.5 / 2.5 * std::tan(0.3) * 0.2,
                  0.3 - 0.04});
}

TEST_CASE("singular steering and bad steps are rejected") {
  CHECK_THROWS_AS(kbm_step({0, 0, 1, 0, std::numbers::pi / 2}, {}, 0.2, kWheelbase), VehicleError);
  CHECK_THROWS_AS(kbm_step({}, {}, 0.0, kWheelbase), VehicleError);
  CHECK_THROWS_AS(rollout({}, {}, 0.2, kWheelbase), VehicleError);
}

TEST_CASE("rollout is the fold of single steps") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<VehicleInput> inputs;
  for (int i = 0; i < 40; ++i) inputs.push_back({u(rng), 3 * u(rng)});
  const VehicleState x0{0.3, -1.0, 0.5, 0.2, 0.1};
  const auto traj = rollout(x0, inputs, 0.2, kWheelbase);
  REQUIRE(traj.size() == inputs.size());
  VehicleState x = x0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    x = kbm_step(x, inputs[k], 0.2, kWheelbase);
    CHECK(traj[k] == x);
  }
}

TEST_CASE("constant acceleration from rest") {
  const std::vector<VehicleInput> inputs(5, VehicleInput{1.0, 0.0});
  const auto traj = rollout({}, inputs, 0.2, kWheelbase);
  const double expected[] = {0.2, 0.4, 0.6, 0.8, 1.0};
  for (int k = 0; k < 5; ++k) CHECK(traj[k].v == doctest::Approx(expected[k]).epsilon(1e-15));
  const auto still = rollout({}, std::vector<VehicleInput>(5), 0.2, kWheelbase);
  for (const auto& s : still) CHECK(s == VehicleState{});
}

TEST_CASE("constant inputs integrate speed and steering linearly") {
  const VehicleState x0{0, 0, -0.3, 0.4, -0.2};
  const VehicleInput u{0.35, 0.05};
  const auto traj = rollout(x0, std::vector<VehicleInput>(100, u), 0.2, kWheelbase);
  for (int n = 1; n <= 100; ++n) {
    CHECK(std::abs(traj[n - 1].v - (x0.v + n * 0.2 * u.v_dot)) <= 1e-13);
    CHECK(std::abs(traj[n - 1].delta - (x0.delta + n * 0.2 * u.delta_dot)) <= 1e-13);
  }
}

TEST_CASE("the step commutes with rigid motions of the plane") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const VehicleState x{3 * u(rng), 3 * u(rng), 2 * u(rng), 3 * u(rng), 0.6 * u(rng)};
    const VehicleInput in{u(rng), 5 * u(rng)};
    const double rot = 3 * u(rng), tx = 5 * u(rng), ty = 5 * u(rng);
    auto move = [&](const VehicleState& s) {
      const Point2 p = body_to_world({s.px, s.py}, tx, ty, rot);
      return VehicleState{p.x, p.y, s.v, s.theta + rot, s.delta};
    };
    const VehicleState a = move(kbm_step(x, in, 0.2, kWheelbase));
    const VehicleState b = kbm_step(move(x), in, 0.2, kWheelbase);
    CHECK(std::abs(a.px - b.px) < 1e-12);
    CHECK(std::abs(a.py - b.py) < 1e-12);
    CHECK(std::abs(a.theta - b.theta) < 1e-12);
    CHECK(a.v == b.v);
    CHECK(a.delta == b.delta);
  }
}

TEST_CASE("footprint dimensions") {
  VehicleParams p;
  p.d_margin = 0.0;
  const ConvexPolygon bare = footprint({}, p);
  p.d_margin = 0.05;
  const ConvexPolygon inflated = footprint({}, p);
  auto extent = [](const ConvexPolygon& poly) {
    double x0 = 1e9, x1 = -1e9, y0 = 1e9, y1 = -1e9;
    for (const Point2& v : poly.vertices()) {
      x0 = std::min(x0, v.x), x1 = std::max(x1, v.x), y0 = std::min(y0, v.y), y1 = std::max(y1, v.y);
    }
    return std::array<double, 4>{x0, x1, y0, y1};
  };
  const auto e0 = extent(bare);
  CHECK(e0[0] == doctest::Approx(-0.8));
  CHECK(e0[1] == doctest::Approx(3.2));
  CHECK(e0[2] == doctest::Approx(-0.85));
  CHECK(e0[3] == doctest::Approx(0.85));
  const auto e1 = extent(inflated);
  CHECK(e1[0] == doctest::Approx(-0.85));
  CHECK(e1[1] == doctest::Approx(3.25));
  CHECK(e1[2] == doctest::Approx(-0.9));
  CHECK(e1[3] == doctest::Approx(0.9));

  const ConvexPolygon turned = footprint({0, 0, 0, std::numbers::pi / 2, 0}, p);
  for (const Point2& v : inflated.vertices()) {
    const Point2 r{-v.y, v.x};
    bool found = false;
    for (const Point2& w : turned.vertices()) found = found || norm(w - r) < 1e-12;
    CHECK(found);
  }
}

TEST_CASE("footprint diagonal is pose independent") {
  const VehicleParams p;
  const double diag = std::hypot(p.l_car + 2 * p.d_margin, p.w_car + 2 * p.d_margin);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 100; ++i) {
    const ConvexPolygon f = footprint({u(rng), u(rng), 0, u(rng), 0}, p);
    CHECK(norm(f[0] - f[2]) == doctest::Approx(diag).epsilon(1e-12));
    CHECK(norm(f[1] - f[3]) == doctest::Approx(diag).epsilon(1e-12));
  }
}

TEST_CASE("parameter validation") {
  VehicleParams p;
  CHECK_NOTHROW(p.validate());
  p.l_f = 3.5;  // front overhang would be negative
  CHECK_THROWS_AS(p.validate(), VehicleError);
  p = {};
  p.v_lim = 0.0;
  CHECK_THROWS_AS(p.validate(), VehicleError);
}
