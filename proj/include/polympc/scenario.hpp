#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "polympc/geometry.hpp"
#include "polympc/vehicle.hpp"

namespace polympc {

class ScenarioError : public std::invalid_argument {
 public:
  explicit ScenarioError(const std::string& what) : std::invalid_argument(what) {}
};

/// Diagonal weights of the tracking cost.
struct OcpWeights {
  std::array<double, kStateDim> S_f{};
  std::array<double, kStateDim> Q{};
  std::array<double, kInputDim> R{};

  void validate() const;  // every entry >= 0
  friend bool operator==(const OcpWeights&, const OcpWeights&) = default;
};

using Obstacle = std::variant<ConvexPolygon, CircleObstacle>;

/// Regular grid of start positions; every point gets `theta`.
struct StartGrid {
  Point2 origin;
  double spacing = 0.5;
  int nx = 1;
  int ny = 1;
  double theta = 0.0;

  std::vector<VehicleState> states() const;  // row-major, x fastest
};

struct Scenario {
  std::string name;
  VehicleParams vehicle;
  OcpWeights weights;
  std::vector<Obstacle> obstacles;
  VehicleState x_ref;
  std::vector<VehicleState> initial_states;
  std::optional<StartGrid> grid;  // provenance of initial_states when generated
  double dtau = 0.2;
  int horizon = 21;
  double max_sim_time = 60.0;

  /// Checks parameters and that x_ref and every initial footprint are free
  /// of every obstacle under the exact intersection test.
  void validate() const;
};

/// Exact collision test of the inflated footprint at `x` against one obstacle.
bool collides(const VehicleState& x, const VehicleParams& params, const Obstacle& obstacle);
bool collides(const VehicleState& x, const Scenario& scenario);

}  // namespace polympc
