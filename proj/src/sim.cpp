#include "polympc/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "polympc/ocp.hpp"

namespace polympc {

std::string_view to_string(TimingMode m) { return m == TimingMode::Fixed ? "fixed" : "realtime"; }

TimingMode parse_timing(std::string_view name) {
  if (name == "fixed") return TimingMode::Fixed;
  if (name == "realtime") return TimingMode::Realtime;
  throw std::invalid_argument("unknown timing mode: " + std::string(name));
}

bool is_success(const VehicleState& x, const VehicleState& x_ref, const SuccessCriteria& c) {
  const double dist = std::hypot(x.px - x_ref.px, x.py - x_ref.py);
  const double dtheta = std::remainder(x.theta - x_ref.theta, 2.0 * std::numbers::pi);
  if (dist > c.position_tol || std::abs(dtheta) > c.heading_tol) return false;
  return !c.require_stop || std::abs(x.v) < c.speed_tol;
}

double EpisodeResult::avg_solve_time() const {
  if (solve_times.empty()) return 0.0;
  double sum = 0.0;
  for (double t : solve_times) sum += t;
  return sum / static_cast<double>(solve_times.size());
}

double EpisodeResult::max_solve_time() const {
  return solve_times.empty() ? 0.0 : *std::max_element(solve_times.begin(), solve_times.end());
}

namespace {

VehicleInput clamp_input(VehicleInput u, const VehicleParams& p) {
  if (!std::isfinite(u.v_dot) || !std::isfinite(u.delta_dot)) return {};
  u.v_dot = std::clamp(u.v_dot, -p.v_dot_lim, p.v_dot_lim);
  u.delta_dot = std::clamp(u.delta_dot, -p.delta_dot_lim, p.delta_dot_lim);
  return u;
}

VehicleState advance(VehicleState x, const VehicleInput& u, double dt, double max_substep, double wheelbase) {
  const int steps = std::max(1, static_cast<int>(std::ceil(dt / max_substep - 1e-9)));
  const double h = dt / steps;
  for (int i = 0; i < steps; ++i) x = kbm_step(x, u, h, wheelbase);
  return x;
}

}  // namespace

EpisodeResult run_episode(const Scenario& scenario, const VehicleState& x0, Method method,
                          const EpisodeOptions& options) {
  EpisodeResult out;
  VehicleState x = x0;
  VehicleInput u_prev{};
  double t = 0.0;
  out.trace.push_back({t, x, u_prev});
  if (collides(x, scenario)) {
    out.collision = true;
    return out;
  }
  if (is_success(x, scenario.x_ref, options.success)) {
    out.success = true;
    return out;
  }

  const VarLayout layout = layout_for(scenario, method);
  std::optional<Eigen::VectorXd> previous;
  int consecutive_divergences = 0;
  constexpr double kTimeSlack = 1e-9;

  while (t < scenario.max_sim_time - kTimeSlack) {
    const NlpProblem problem = assemble(scenario, x, u_prev, method);
    SolveResult res = solve(problem,
                            previous ? shift_warm_start(*previous, layout) : cold_start(scenario, x, u_prev, method),
                            options.solver);
    if (previous && res.status != SolveStatus::Converged &&
        res.constraint_violation > options.cold_retry_violation) {
      // A shifted plan can sit in a locally infeasible basin; the rollout of
      // the applied input does not inherit it. Both solves count as time spent.
      SolveResult retry = solve(problem, cold_start(scenario, x, u_prev, method), options.solver);
      retry.solve_time += res.solve_time;
      if (retry.status == SolveStatus::Converged || retry.constraint_violation < res.constraint_violation) {
        res = std::move(retry);
      } else {
        res.solve_time = retry.solve_time;
      }
    }
    out.solve_times.push_back(res.solve_time);

    if (res.status != SolveStatus::Converged) ++out.solver_failures;
    consecutive_divergences = res.status == SolveStatus::Diverged ? consecutive_divergences + 1 : 0;
    if (consecutive_divergences > options.max_consecutive_divergences) {
      out.aborted = true;
      break;
    }
    const bool usable = res.x.size() == layout.num_vars() && res.x.allFinite();
    previous = usable ? std::optional<Eigen::VectorXd>(res.x) : std::nullopt;
    const VehicleInput u_next =
        usable ? clamp_input(input_at(res.x, layout, 1), scenario.vehicle) : VehicleInput{};

    double dt = scenario.dtau;
    if (options.timing == TimingMode::Realtime) dt = std::clamp(res.solve_time, 1e-3, scenario.dtau);
    dt = std::min(dt, scenario.max_sim_time - t);
    const double substep = options.timing == TimingMode::Fixed ? scenario.dtau : options.realtime_substep;
    x = advance(x, u_prev, dt, substep, scenario.vehicle.l_f);
    t += dt;
    u_prev = u_next;
    out.trace.push_back({t, x, u_prev});

    if (collides(x, scenario)) {
      out.collision = true;
      break;
    }
    if (is_success(x, scenario.x_ref, options.success)) {
      out.success = true;
      break;
    }
  }
  out.completion_time = t;
  return out;
}

double sct(std::span<const EpisodeResult> results, std::span<const double> reference_times) {
  if (results.empty()) throw std::invalid_argument("sct needs at least one episode");
  if (results.size() != reference_times.size()) throw std::invalid_argument("one reference time per episode");
  double sum = 0.0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].success) continue;
    const double c = results[i].completion_time;
    const double ref = reference_times[i];
    if (c == 0.0 && ref == 0.0) {
      sum += 1.0;
      continue;
    }
    if (!(ref > 0.0)) throw std::invalid_argument("reference time must be positive");
    sum += ref / std::max(c, ref);
  }
  return sum / static_cast<double>(results.size());
}

std::vector<double> reference_times(std::span<const std::vector<EpisodeResult>> per_method) {
  if (per_method.empty()) return {};
  const std::size_t n = per_method.front().size();
  std::vector<double> out(n, std::numeric_limits<double>::quiet_NaN());
  for (const auto& runs : per_method) {
    if (runs.size() != n) throw std::invalid_argument("methods ran different episode counts");
    for (std::size_t i = 0; i < n; ++i) {
      if (runs[i].success && !(out[i] <= runs[i].completion_time)) out[i] = runs[i].completion_time;
    }
  }
  return out;
}

void BatchSummary::score() {
  if (episodes.empty()) {
    sct = success_rate = avg_solve_time = worst_solve_time = 0.0;
    return;
  }
  if (reference_times.size() != episodes.size()) {
    reference_times = polympc::reference_times(std::span<const std::vector<EpisodeResult>>(&episodes, 1));
  }
  sct = polympc::sct(episodes, reference_times);
  int successes = 0;
  double total = 0.0;
  std::size_t cycles = 0;
  worst_solve_time = 0.0;
  for (const EpisodeResult& e : episodes) {
    successes += e.success ? 1 : 0;
    for (double s : e.solve_times) total += s;
    cycles += e.solve_times.size();
    worst_solve_time = std::max(worst_solve_time, e.max_solve_time());
  }
  success_rate = static_cast<double>(successes) / static_cast<double>(episodes.size());
  avg_solve_time = cycles ? total / static_cast<double>(cycles) : 0.0;
}

BatchSummary run_batch(const Scenario& scenario, Method method, const EpisodeOptions& options, int parallelism,
                       std::span<const int> episode_ids) {
  BatchSummary b;
  b.scenario = scenario.name;
  b.method = method;
  const int total = static_cast<int>(scenario.initial_states.size());
  if (episode_ids.empty()) {
    for (int i = 0; i < total; ++i) b.episode_ids.push_back(i);
  } else {
    b.episode_ids.assign(episode_ids.begin(), episode_ids.end());
  }
  for (int id : b.episode_ids) {
    if (id < 0 || id >= total) throw std::out_of_range("episode id " + std::to_string(id) + " out of range");
    b.initial_states.push_back(scenario.initial_states[static_cast<std::size_t>(id)]);
  }
  b.episodes.resize(b.episode_ids.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < b.episodes.size(); i = next++) {
      b.episodes[i] = run_episode(scenario, b.initial_states[i], method, options);
    }
  };
  const int threads = std::clamp(parallelism, 1, std::max(1, static_cast<int>(b.episodes.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  b.score();
  return b;
}

void score_against(std::span<BatchSummary* const> batches) {
  std::vector<std::vector<EpisodeResult>> runs;
  for (const BatchSummary* b : batches) runs.push_back(b->episodes);
  const std::vector<double> ref = reference_times(runs);
  for (BatchSummary* b : batches) {
    b->reference_times = ref;
    b->score();
  }
}

std::vector<int> evenly_spaced(int total, int count) {
  if (total <= 0 || count <= 0) return {};
  count = std::min(count, total);
  std::vector<int> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(count == 1 ? total / 2 : static_cast<int>(std::lround(i * (total - 1.0) / (count - 1.0))));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Built-in layouts. Units are meters and radians; x_ref and start poses refer
// to the rear-axle center.

namespace {

ConvexPolygon box(double x0, double y0, double x1, double y1) {
  return ConvexPolygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

OcpWeights reverse_weights() {
  return {{300, 300, 15, 600, 15}, {0.25, 0.25, 0.05, 1, 0.05}, {0.2, 20}};
}

OcpWeights parallel_weights() {
  return {{800, 800, 20, 400, 20}, {0.5, 0.5, 0.05, 0.5, 0.05}, {0.2, 20}};
}

// Three 2.5 m wide, 5 m deep bays opening onto a 10 m apron at y = 0; the
// outer bays hold parked cars and the ego reverses into the middle one.
Scenario reverse_parking() {
  Scenario s;
  s.name = "reverse";
  s.weights = reverse_weights();
  s.obstacles = {
      box(-3.35, -4.5, -1.65, -0.5),  // parked car, left bay
      box(1.65, -4.5, 3.35, -0.5),    // parked car, right bay
      box(-3.75, -5.5, 3.75, -5.0),   // back wall
      box(-4.25, -5.5, -3.75, 0.0),   // left wall
      box(3.75, -5.5, 4.25, 0.0),     // right wall
      box(-12.0, 10.0, 12.0, 10.5),   // far side of the apron
  };
  s.x_ref = {0.0, -3.7, 0.0, std::numbers::pi / 2, 0.0};
  s.grid = StartGrid{{-3.5, 3.0}, 0.5, 15, 7, 0.0};
  s.initial_states = s.grid->states();
  return s;
}

// A 7 m gap between two parked cars along a curb, opening onto a 3.5 m lane.
Scenario parallel_parking() {
  Scenario s;
  s.name = "parallel";
  s.weights = parallel_weights();
  s.obstacles = {
      box(-7.5, 0.2, -3.5, 1.9),    // parked car behind the gap
      box(3.5, 0.2, 7.5, 1.9),      // parked car ahead of the gap
      box(-12.0, -0.5, 12.0, 0.0),  // curb
      box(-12.0, 5.6, 12.0, 6.1),   // far edge of the lane
  };
  s.x_ref = {-1.2, 1.05, 0.0, 0.0, 0.0};
  s.grid = StartGrid{{1.0, 3.2}, 0.2, 11, 6, 0.0};
  s.initial_states = s.grid->states();
  return s;
}

Scenario polygon_course() {
  Scenario s;
  s.name = "polygon";
  s.weights = reverse_weights();
  s.obstacles = {
      ConvexPolygon({{-2.0, -1.2}, {0.5, -2.5}, {2.0, -0.8}, {0.8, 1.0}, {-1.5, 0.6}}),
      ConvexPolygon({{4.0, 2.2}, {6.0, 1.0}, {8.0, 1.8}, {8.0, 4.0}, {5.5, 4.5}, {4.0, 3.6}}),
  };
  s.x_ref = {12.0, 0.0, 0.0, 0.0, 0.0};
  s.grid = StartGrid{{-9.0, -1.0}, 0.5, 3, 5, 0.0};
  s.initial_states = s.grid->states();
  return s;
}

Scenario circle_course() {
  Scenario s;
  s.name = "circle";
  s.weights = reverse_weights();
  s.obstacles = {
      CircleObstacle{{-4.0, 2.5}, 1.0}, CircleObstacle{{-2.0, -1.0}, 0.8}, CircleObstacle{{1.0, 2.0}, 0.7},
      CircleObstacle{{2.5, -2.5}, 1.0}, CircleObstacle{{5.0, 0.5}, 0.9},  CircleObstacle{{8.0, 3.0}, 0.6},
      CircleObstacle{{8.5, -2.0}, 0.8},
  };
  s.x_ref = {13.0, 0.0, 0.0, 0.0, 0.0};
  s.grid = StartGrid{{-12.0, -1.0}, 0.5, 3, 5, 0.0};
  s.initial_states = s.grid->states();
  return s;
}

}  // namespace

std::map<std::string, Scenario> make_scenarios() {
  std::map<std::string, Scenario> out;
  for (Scenario s : {reverse_parking(), parallel_parking(), polygon_course(), circle_course()}) {
    s.validate();
    out.emplace(s.name, std::move(s));
  }
  return out;
}

Scenario builtin_scenario(const std::string& name) {
  auto all = make_scenarios();
  auto it = all.find(name);
  if (it == all.end()) throw ScenarioError("unknown built-in scenario: " + name);
  return it->second;
}

}  // namespace polympc
