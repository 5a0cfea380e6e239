#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "polympc/scenario.hpp"

namespace polympc {

/// Scenario document (SI units):
///   { "name", "vehicle": {l_car, w_car, l_f, l_roh, d_margin, v_lim, delta_lim,
///     v_dot_lim, delta_dot_lim}, "weights": {"S_f": [5], "Q": [5], "R": [2]},
///     "obstacles": [{"type": "polygon", "vertices": [[x, y], ...]} |
///                   {"type": "circle", "center": [x, y], "radius": r}],
///     "x_ref": [px, py, v, theta, delta],
///     "initial_states": [[5], ...] | "grid": {"origin": [x, y], "spacing",
///     "nx", "ny", "theta"}, "dtau", "horizon", "max_sim_time" }
/// Missing vehicle fields, dtau, horizon and max_sim_time take their defaults.
/// Parsing validates the result; every failure is a ScenarioError.
Scenario scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const Scenario& scenario);

Scenario load_scenario_file(const std::filesystem::path& path);

/// A built-in name ("reverse", ...) or a path to a scenario document.
Scenario resolve_scenario(const std::string& name_or_path);

}  // namespace polympc
