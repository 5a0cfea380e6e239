#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "polympc/geometry.hpp"

namespace polympc {

class VehicleError : public std::invalid_argument {
 public:
  explicit VehicleError(const std::string& what) : std::invalid_argument(what) {}
};

inline constexpr int kStateDim = 5;
inline constexpr int kInputDim = 2;

/// Rear-axle center position, speed, yaw and front tire angle.
struct VehicleState {
  double px = 0.0;
  double py = 0.0;
  double v = 0.0;
  double theta = 0.0;
  double delta = 0.0;

  std::array<double, kStateDim> as_array() const { return {px, py, v, theta, delta}; }
  static VehicleState from_array(std::span<const double> a) { return {a[0], a[1], a[2], a[3], a[4]}; }
  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct VehicleInput {
  double v_dot = 0.0;
  double delta_dot = 0.0;

  friend bool operator==(const VehicleInput&, const VehicleInput&) = default;
};

struct VehicleParams {
  double l_car = 4.0;       // overall length [m]
  double w_car = 1.7;       // overall width [m]
  double l_f = 2.5;         // wheelbase [m]
  double l_roh = 0.8;       // rear overhang [m]
  double d_margin = 0.05;   // footprint inflation [m]
  double v_lim = 2.0;       // |v| bound [m/s]
  double delta_lim = 0.70;  // |delta| bound [rad]
  double v_dot_lim = 1.0;   // |v_dot| bound [m/s^2]
  double delta_dot_lim = 6.28;  // |delta_dot| bound [rad/s]

  /// Throws VehicleError unless every field is positive (d_margin may be 0)
  /// and the front overhang l_car - l_f - l_roh is non-negative.
  void validate() const;
};

/// One forward-Euler step of the kinematic bicycle model.
VehicleState kbm_step(const VehicleState& x, const VehicleInput& u, double dtau, double wheelbase);

/// States k = 1..N obtained by folding kbm_step over `inputs`.
std::vector<VehicleState> rollout(const VehicleState& x0, std::span<const VehicleInput> inputs,
                                  double dtau, double wheelbase);

/// Inflated footprint corners in the body frame (rear-axle origin, x forward),
/// counter-clockwise starting at the rear-right corner.
std::array<Point2, 4> footprint_body(const VehicleParams& params);

ConvexPolygon footprint(const VehicleState& x, const VehicleParams& params);

/// Body-frame point expressed in the world frame for pose (px, py, theta).
Point2 body_to_world(Point2 body, double px, double py, double theta);

}  // namespace polympc
