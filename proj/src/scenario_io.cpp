#include "polympc/scenario_io.hpp"

#include <cmath>
#include <fstream>

#include "polympc/sim.hpp"

namespace polympc {
namespace {

using nlohmann::json;

double number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw ScenarioError(std::string("field '") + key + "' must be a number");
  }
  return j.at(key).get<double>();
}

double number_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? number(j, key) : fallback;
}

template <std::size_t N>
std::array<double, N> fixed_array(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != N) {
    throw ScenarioError(what + " must be an array of " + std::to_string(N) + " numbers");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!j[i].is_number()) throw ScenarioError(what + " must contain numbers only");
    out[i] = j[i].get<double>();
  }
  return out;
}

Point2 point(const json& j, const std::string& what) {
  const auto a = fixed_array<2>(j, what);
  return {a[0], a[1]};
}

VehicleState state(const json& j, const std::string& what) {
  return VehicleState::from_array(fixed_array<kStateDim>(j, what));
}

json to_json(Point2 p) { return json::array({p.x, p.y}); }
json to_json(const VehicleState& x) { return x.as_array(); }

Scenario parse(const json& doc) {
  if (!doc.is_object()) throw ScenarioError("scenario document must be a JSON object");
  Scenario sc;
  sc.name = doc.value("name", std::string("custom"));

  if (doc.contains("vehicle")) {
    const json& v = doc.at("vehicle");
    VehicleParams& p = sc.vehicle;
    p.l_car = number_or(v, "l_car", p.l_car);
    p.w_car = number_or(v, "w_car", p.w_car);
    p.l_f = number_or(v, "l_f", p.l_f);
    p.l_roh = number_or(v, "l_roh", p.l_roh);
    p.d_margin = number_or(v, "d_margin", p.d_margin);
    p.v_lim = number_or(v, "v_lim", p.v_lim);
    p.delta_lim = number_or(v, "delta_lim", p.delta_lim);
    p.v_dot_lim = number_or(v, "v_dot_lim", p.v_dot_lim);
    p.delta_dot_lim = number_or(v, "delta_dot_lim", p.delta_dot_lim);
  }

  if (!doc.contains("weights")) throw ScenarioError("missing field 'weights'");
  const json& w = doc.at("weights");
  if (!w.contains("S_f") || !w.contains("Q") || !w.contains("R")) {
    throw ScenarioError("weights need S_f, Q and R");
  }
  sc.weights.S_f = fixed_array<kStateDim>(w.at("S_f"), "weights.S_f");
  sc.weights.Q = fixed_array<kStateDim>(w.at("Q"), "weights.Q");
  sc.weights.R = fixed_array<kInputDim>(w.at("R"), "weights.R");

  if (doc.contains("obstacles")) {
    const json& obs = doc.at("obstacles");
    if (!obs.is_array()) throw ScenarioError("obstacles must be an array");
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const json& o = obs[i];
      const std::string where = "obstacles[" + std::to_string(i) + "]";
      const std::string type = o.is_object() ? o.value("type", std::string()) : std::string();
      if (type == "polygon") {
        if (!o.contains("vertices") || !o.at("vertices").is_array()) {
          throw ScenarioError(where + ".vertices must be an array");
        }
        std::vector<Point2> verts;
        for (const json& p : o.at("vertices")) verts.push_back(point(p, where + ".vertices[]"));
        try {
          sc.obstacles.emplace_back(ConvexPolygon(std::move(verts)));
        } catch (const GeometryError& e) {
          throw ScenarioError(where + ": " + e.what());
        }
      } else if (type == "circle") {
        if (!o.contains("center")) throw ScenarioError(where + ".center is missing");
        sc.obstacles.emplace_back(CircleObstacle{point(o.at("center"), where + ".center"), number(o, "radius")});
      } else {
        throw ScenarioError(where + ".type must be \"polygon\" or \"circle\"");
      }
    }
  }

  if (!doc.contains("x_ref")) throw ScenarioError("missing field 'x_ref'");
  sc.x_ref = state(doc.at("x_ref"), "x_ref");

  const bool has_states = doc.contains("initial_states");
  const bool has_grid = doc.contains("grid");
  if (has_states == has_grid) throw ScenarioError("exactly one of 'initial_states' and 'grid' is required");
  if (has_states) {
    const json& s = doc.at("initial_states");
    if (!s.is_array() || s.empty()) throw ScenarioError("initial_states must be a non-empty array");
    for (const json& x : s) sc.initial_states.push_back(state(x, "initial_states[]"));
  } else {
    const json& g = doc.at("grid");
    StartGrid grid;
    if (!g.contains("origin")) throw ScenarioError("grid.origin is missing");
    grid.origin = point(g.at("origin"), "grid.origin");
    grid.spacing = number(g, "spacing");
    const double nx = number(g, "nx");
    const double ny = number(g, "ny");
    if (nx != std::floor(nx) || ny != std::floor(ny)) throw ScenarioError("grid.nx and grid.ny must be integers");
    grid.nx = static_cast<int>(nx);
    grid.ny = static_cast<int>(ny);
    grid.theta = number_or(g, "theta", 0.0);
    sc.initial_states = grid.states();
    sc.grid = grid;
  }

  sc.dtau = number_or(doc, "dtau", sc.dtau);
  const double horizon = number_or(doc, "horizon", sc.horizon);
  if (horizon != std::floor(horizon)) throw ScenarioError("horizon must be an integer");
  sc.horizon = static_cast<int>(horizon);
  sc.max_sim_time = number_or(doc, "max_sim_time", sc.max_sim_time);

  try {
    sc.validate();
  } catch (const VehicleError& e) {
    throw ScenarioError(e.what());
  }
  return sc;
}

}  // namespace

Scenario scenario_from_json(const json& doc) {
  try {
    return parse(doc);
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("malformed scenario: ") + e.what());
  }
}

json scenario_to_json(const Scenario& sc) {
  const VehicleParams& p = sc.vehicle;
  json doc;
  doc["name"] = sc.name;
  doc["vehicle"] = {{"l_car", p.l_car},         {"w_car", p.w_car},       {"l_f", p.l_f},
                    {"l_roh", p.l_roh},         {"d_margin", p.d_margin}, {"v_lim", p.v_lim},
                    {"delta_lim", p.delta_lim}, {"v_dot_lim", p.v_dot_lim}, {"delta_dot_lim", p.delta_dot_lim}};
  doc["weights"] = {{"S_f", sc.weights.S_f}, {"Q", sc.weights.Q}, {"R", sc.weights.R}};
  json obs = json::array();
  for (const Obstacle& o : sc.obstacles) {
    if (const auto* poly = std::get_if<ConvexPolygon>(&o)) {
      json verts = json::array();
      for (const Point2& v : poly->vertices()) verts.push_back(to_json(v));
      obs.push_back({{"type", "polygon"}, {"vertices", verts}});
    } else {
      const auto& c = std::get<CircleObstacle>(o);
      obs.push_back({{"type", "circle"}, {"center", to_json(c.center)}, {"radius", c.radius}});
    }
  }
  doc["obstacles"] = obs;
  doc["x_ref"] = to_json(sc.x_ref);
  if (sc.grid) {
    const StartGrid& g = *sc.grid;
    doc["grid"] = {{"origin", to_json(g.origin)}, {"spacing", g.spacing}, {"nx", g.nx}, {"ny", g.ny}, {"theta", g.theta}};
  } else {
    json states = json::array();
    for (const VehicleState& x : sc.initial_states) states.push_back(to_json(x));
    doc["initial_states"] = states;
  }
  doc["dtau"] = sc.dtau;
  doc["horizon"] = sc.horizon;
  doc["max_sim_time"] = sc.max_sim_time;
  return doc;
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot read scenario file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ScenarioError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  Scenario sc = scenario_from_json(doc);
  if (!doc.contains("name")) sc.name = path.stem().string();
  return sc;
}

Scenario resolve_scenario(const std::string& name_or_path) {
  const auto builtins = make_scenarios();
  if (const auto it = builtins.find(name_or_path); it != builtins.end()) return it->second;
  return load_scenario_file(name_or_path);
}

}  // namespace polympc
