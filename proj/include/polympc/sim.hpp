#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polympc/constraints.hpp"
#include "polympc/nlp.hpp"
#include "polympc/scenario.hpp"

namespace polympc {

enum class TimingMode { Fixed, Realtime };

std::string_view to_string(TimingMode m);
TimingMode parse_timing(std::string_view name);

struct SuccessCriteria {
  double position_tol = 0.2;               // [m]
  double heading_tol = 10.0 * 0.017453292519943295;  // [rad], on the wrapped difference
  double speed_tol = 0.1;                  // [m/s]
  bool require_stop = true;                // gate on |v| < speed_tol
};

bool is_success(const VehicleState& x, const VehicleState& x_ref, const SuccessCriteria& c);

struct EpisodeOptions {
  TimingMode timing = TimingMode::Fixed;
  SolverOptions solver;
  SuccessCriteria success;
  int max_consecutive_divergences = 10;
  double realtime_substep = 0.02;  // [s]
  // A warm-started solve that ends this infeasible is repeated from a rollout;
  // infinity disables the retry.
  double cold_retry_violation = 1e-4;
};

struct TraceSample {
  double time = 0.0;
  VehicleState state;
  VehicleInput input;  // input applied from `time` on
};

struct EpisodeResult {
  std::vector<TraceSample> trace;
  bool success = false;
  double completion_time = 0.0;  // time of the success check, or elapsed time on failure
  std::vector<double> solve_times;
  bool collision = false;
  int solver_failures = 0;  // cycles whose solve did not converge
  bool aborted = false;     // too many consecutive diverged solves

  double avg_solve_time() const;
  double max_solve_time() const;
};

/// Receding-horizon loop. The input found at cycle t is applied after the
/// plant has been advanced with the input of the previous cycle, so the
/// prediction's fixed first step matches the plant exactly in fixed mode.
EpisodeResult run_episode(const Scenario& scenario, const VehicleState& x0, Method method,
                          const EpisodeOptions& options = {});

/// Mean of S_i T_i / max(C_i, T_i); an episode with S_i = 0 contributes 0.
/// Throws std::invalid_argument on empty input, mismatched lengths or a
/// successful episode whose T_i is not positive (unless C_i = T_i = 0).
double sct(std::span<const EpisodeResult> results, std::span<const double> reference_times);

/// Per-episode minimum completion time over the successful runs of every
/// method; NaN where every method failed.
std::vector<double> reference_times(std::span<const std::vector<EpisodeResult>> per_method);

struct BatchSummary {
  std::string scenario;
  Method method = Method::Msde;
  std::vector<int> episode_ids;
  std::vector<VehicleState> initial_states;
  std::vector<EpisodeResult> episodes;
  std::vector<double> reference_times;
  double sct = 0.0;
  double success_rate = 0.0;
  double avg_solve_time = 0.0;    // [s] over every cycle of every episode
  double worst_solve_time = 0.0;  // [s]

  /// Recomputes sct from `episodes` and `reference_times`.
  void score();
};

/// Runs the selected initial states (all when `episode_ids` is empty) on up to
/// `parallelism` threads. Results are ordered by episode id and, in fixed
/// timing mode, independent of `parallelism`.
BatchSummary run_batch(const Scenario& scenario, Method method, const EpisodeOptions& options,
                       int parallelism = 1, std::span<const int> episode_ids = {});

/// Joins batches of different methods on the same episodes: fills each
/// reference_times with the per-episode minimum and rescores.
void score_against(std::span<BatchSummary* const> batches);

/// `count` indices spread evenly over [0, total).
std::vector<int> evenly_spaced(int total, int count);

/// Built-in scenarios: "reverse", "parallel", "polygon", "circle".
std::map<std::string, Scenario> make_scenarios();
Scenario builtin_scenario(const std::string& name);  // throws ScenarioError

}  // namespace polympc
