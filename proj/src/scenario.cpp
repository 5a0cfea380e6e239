#include "polympc/scenario.hpp"

#include <cmath>

namespace polympc {

void OcpWeights::validate() const {
  auto nonneg = [](const auto& d) {
    for (double v : d) {
      if (!(v >= 0.0) || !std::isfinite(v)) return false;
    }
    return true;
  };
  if (!nonneg(S_f) || !nonneg(Q) || !nonneg(R)) throw ScenarioError("weights must be finite and non-negative");
}

std::vector<VehicleState> StartGrid::states() const {
  if (nx < 1 || ny < 1 || !(spacing > 0.0)) throw ScenarioError("grid needs nx, ny >= 1 and spacing > 0");
  std::vector<VehicleState> out;
  out.reserve(static_cast<std::size_t>(nx * ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      out.push_back({origin.x + i * spacing, origin.y + j * spacing, 0.0, theta, 0.0});
    }
  }
  return out;
}

bool collides(const VehicleState& x, const VehicleParams& params, const Obstacle& obstacle) {
  const ConvexPolygon fp = footprint(x, params);
  if (const auto* poly = std::get_if<ConvexPolygon>(&obstacle)) return polygons_intersect(fp, *poly);
  return polygon_circle_intersect(fp, std::get<CircleObstacle>(obstacle));
}

bool collides(const VehicleState& x, const Scenario& scenario) {
  for (const Obstacle& o : scenario.obstacles) {
    if (collides(x, scenario.vehicle, o)) return true;
  }
  return false;
}

void Scenario::validate() const {
  vehicle.validate();
  weights.validate();
  if (!(dtau > 0.0)) throw ScenarioError("dtau must be positive");
  if (horizon < 2) throw ScenarioError("horizon must be at least 2");
  if (!(max_sim_time > 0.0)) throw ScenarioError("max_sim_time must be positive");
  for (const Obstacle& o : obstacles) {
    if (const auto* c = std::get_if<CircleObstacle>(&o); c && !(c->radius > 0.0)) {
      throw ScenarioError("circle radius must be positive");
    }
  }
  if (collides(x_ref, *this)) throw ScenarioError("reference state collides with an obstacle");
  for (std::size_t i = 0; i < initial_states.size(); ++i) {
    if (collides(initial_states[i], *this)) {
      throw ScenarioError("initial state " + std::to_string(i) + " collides with an obstacle");
    }
  }
}

}  // namespace polympc
