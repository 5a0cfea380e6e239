#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "polympc/constraints.hpp"
#include "polympc/nlp.hpp"
#include "polympc/sim.hpp"

namespace polympc {

/// Exit codes of every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitBadInput = 2;  // unreadable or mismatched scenarios, bad usage
inline constexpr int kExitPanic = 3;     // the solver or simulation threw

struct RunConfig {
  std::string scenario;  // built-in name or path to a scenario document
  Method method = Method::Msde;
  TimingMode timing = TimingMode::Fixed;
  SolverOptions solver;
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;  // drives the sampled checks
  int parallelism = 1;
  bool batch = false;
  int episode = 0;      // used when `batch` is false
  int subset = 0;       // > 0: that many evenly spaced episodes instead of all
  bool svg = false;
  bool reproducible = false;  // leave wall-clock columns out of the outputs
};

/// `--out`, else $POLYMPC_OUT, else "results".
std::filesystem::path default_out_dir(const std::optional<std::string>& flag);

/// Writes results.csv and summary.json (and SVGs on request) into out_dir.
int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Runs both configurations on the same episodes, scores them against the
/// per-episode minimum completion time and prints the joint table. Each
/// method's files go to its own subdirectory; compare.csv holds T_i.
int cmd_compare(const RunConfig& a, const RunConfig& b, std::ostream& out, std::ostream& err);

/// Variable counts, seeded polygon equivalence and gradient audit.
int cmd_check(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace polympc
