#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "polympc/sim.hpp"

namespace polympc {

inline constexpr const char* kResultsHeader =
    "episode,x0_px,x0_py,success,completion_time_s,avg_solve_ms,max_solve_ms,collision,solver_failures";

/// One row per episode. With `wall_clock` false the two solve-time columns are
/// left empty, so fixed-timing output depends on the inputs only.
void write_results_csv(std::ostream& out, const BatchSummary& batch, bool wall_clock = true);

struct ResultsRow {
  int episode = 0;
  double x0_px = 0.0;
  double x0_py = 0.0;
  bool success = false;
  double completion_time = 0.0;
  bool collision = false;
  int solver_failures = 0;
};

/// Parses what write_results_csv produces. Throws std::runtime_error on a
/// wrong header or malformed row.
std::vector<ResultsRow> read_results_csv(std::istream& in);

/// Scores rows the same way as BatchSummary::score, against the given
/// per-episode reference times.
double sct_from_rows(std::span<const ResultsRow> rows, std::span<const double> reference_times);

nlohmann::json summary_json(const BatchSummary& batch, TimingMode timing, bool wall_clock = true);

/// Top-down view: one polygon per polygonal obstacle, one circle per circular
/// obstacle, the goal footprint as a path and one polyline per episode.
std::string trajectory_svg(const Scenario& scenario, std::span<const EpisodeResult> episodes,
                           std::span<const int> episode_ids);

}  // namespace polympc
