#include "polympc/vehicle.hpp"

#include <cmath>
#include <numbers>

namespace polympc {

void VehicleParams::validate() const {
  const bool positive = l_car > 0 && w_car > 0 && l_f > 0 && l_roh > 0 && v_lim > 0 &&
                        delta_lim > 0 && v_dot_lim > 0 && delta_dot_lim > 0 && d_margin >= 0;
  if (!positive) throw VehicleError("vehicle parameters must be positive");
  if (l_car - l_f - l_roh < 0) throw VehicleError("front overhang l_car - l_f - l_roh is negative");
  if (delta_lim >= std::numbers::pi / 2) throw VehicleError("steering limit must be below pi/2");
}

VehicleState kbm_step(const VehicleState& x, const VehicleInput& u, double dtau, double wheelbase) {
  if (!(dtau > 0.0)) throw VehicleError("integration step must be positive");
  if (std::abs(std::abs(x.delta) - std::numbers::pi / 2) < 1e-6) {
    throw VehicleError("steering angle is singular (|delta| = pi/2)");
  }
  VehicleState next = x;
  next.px += x.v * std::cos(x.theta) * dtau;
  next.py += x.v * std::sin(x.theta) * dtau;
  next.v += u.v_dot * dtau;
  next.theta += x.v / wheelbase * std::tan(x.delta) * dtau;
  next.delta += u.delta_dot * dtau;
  return next;
}

std::vector<VehicleState> rollout(const VehicleState& x0, std::span<const VehicleInput> inputs,
                                  double dtau, double wheelbase) {
  if (inputs.empty()) throw VehicleError("rollout needs at least one input");
  std::vector<VehicleState> states;
  states.reserve(inputs.size());
  VehicleState x = x0;
  for (const VehicleInput& u : inputs) {
    x = kbm_step(x, u, dtau, wheelbase);
    states.push_back(x);
  }
  return states;
}

std::array<Point2, 4> footprint_body(const VehicleParams& p) {
  const double rear = -(p.l_roh + p.d_margin);
  const double front = p.l_car - p.l_roh + p.d_margin;
  const double half_w = 0.5 * p.w_car + p.d_margin;
  return {Point2{rear, -half_w}, Point2{front, -half_w}, Point2{front, half_w}, Point2{rear, half_w}};
}

Point2 body_to_world(Point2 body, double px, double py, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {px + c * body.x - s * body.y, py + s * body.x + c * body.y};
}

ConvexPolygon footprint(const VehicleState& x, const VehicleParams& params) {
  const auto body = footprint_body(params);
  std::vector<Point2> world;
  world.reserve(body.size());
  for (const Point2& b : body) world.push_back(body_to_world(b, x.px, x.py, x.theta));
  return ConvexPolygon(std::move(world));
}

}  // namespace polympc
