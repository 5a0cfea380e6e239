#include "polympc/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "polympc/audit.hpp"
#include "polympc/ocp.hpp"
#include "polympc/report.hpp"
#include "polympc/scenario_io.hpp"

namespace polympc {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Everything that determines the episodes except the label.
json scenario_identity(const Scenario& sc) {
  json doc = scenario_to_json(sc);
  doc.erase("name");
  doc.erase("grid");
  json states = json::array();
  for (const VehicleState& x : sc.initial_states) states.push_back(x.as_array());
  doc["initial_states"] = states;
  return doc;
}

EpisodeOptions episode_options(const RunConfig& c) {
  EpisodeOptions o;
  o.timing = c.timing;
  o.solver = c.solver;
  return o;
}

// Empty means every episode.
std::vector<int> select_episodes(const RunConfig& c, const Scenario& sc) {
  const int total = static_cast<int>(sc.initial_states.size());
  if (!c.batch) {
    if (c.episode < 0 || c.episode >= total) {
      throw ScenarioError("episode " + std::to_string(c.episode) + " is outside 0.." + std::to_string(total - 1));
    }
    return {c.episode};
  }
  if (c.subset > 0 && c.subset < total) return evenly_spaced(total, c.subset);
  return {};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
}

void write_outputs(const RunConfig& c, const Scenario& sc, const BatchSummary& b, const fs::path& dir) {
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "results.csv", std::ios::binary);
    write_results_csv(f, b, !c.reproducible);
    if (!f) throw std::runtime_error("cannot write '" + (dir / "results.csv").string() + "'");
  }
  write_text(dir / "summary.json", summary_json(b, c.timing, !c.reproducible).dump(2) + "\n");
  if (!c.svg) return;
  for (std::size_t i = 0; i < b.episodes.size(); ++i) {
    const int id = b.episode_ids[i];
    write_text(dir / ("trajectory_" + std::to_string(id) + ".svg"),
               trajectory_svg(sc, std::span(&b.episodes[i], 1), std::span(&id, 1)));
  }
  if (c.batch) write_text(dir / "trajectories.svg", trajectory_svg(sc, b.episodes, b.episode_ids));
}

void print_row(std::ostream& out, const std::string& label, const BatchSummary& b, bool wall_clock) {
  char buf[160];
  if (wall_clock) {
    std::snprintf(buf, sizeof buf, "%-8s %8.4f %9.4f %14.2f %16.2f", label.c_str(), b.sct, b.success_rate,
                  1e3 * b.avg_solve_time, 1e3 * b.worst_solve_time);
  } else {
    std::snprintf(buf, sizeof buf, "%-8s %8.4f %9.4f %14s %16s", label.c_str(), b.sct, b.success_rate, "-", "-");
  }
  out << buf << '\n';
}

void print_table_header(std::ostream& out) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-8s %8s %9s %14s %16s", "method", "SCT", "success", "avg_solve_ms",
                "worst_solve_ms");
  out << buf << '\n';
}

// Failures inside the simulation are reported as panics; scenario problems
// are the caller's input errors.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ScenarioError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::exception& e) {
    err << "panic: " << e.what() << '\n';
    return kExitPanic;
  }
}

}  // namespace

fs::path default_out_dir(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("POLYMPC_OUT"); env != nullptr && *env != '\0') return env;
  return "results";
}

int cmd_run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  Scenario sc;
  std::vector<int> ids;
  try {
    sc = resolve_scenario(c.scenario);
    ids = select_episodes(c, sc);
  } catch (const ScenarioError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
  return guarded(err, [&] {
    const BatchSummary b = run_batch(sc, c.method, episode_options(c), c.parallelism, ids);
    write_outputs(c, sc, b, c.out_dir);
    out << sc.name << ' ' << to_string(c.method) << " (" << to_string(c.timing) << "): " << b.episodes.size()
        << " episode(s), success rate " << fmt("%.4f", b.success_rate) << ", SCT " << fmt("%.4f", b.sct);
    if (!c.reproducible) {
      out << ", solve time avg " << fmt("%.2f", 1e3 * b.avg_solve_time) << " ms, worst "
          << fmt("%.2f", 1e3 * b.worst_solve_time) << " ms";
    }
    out << "\nwrote " << c.out_dir.string() << '\n';
    return kExitOk;
  });
}

int cmd_compare(const RunConfig& a, const RunConfig& b, std::ostream& out, std::ostream& err) {
  Scenario sa;
  Scenario sb;
  std::vector<int> ids;
  try {
    sa = resolve_scenario(a.scenario);
    sb = resolve_scenario(b.scenario);
    if (scenario_identity(sa) != scenario_identity(sb)) {
      throw ScenarioError("scenarios '" + a.scenario + "' and '" + b.scenario + "' differ");
    }
    ids = select_episodes(a, sa);
  } catch (const ScenarioError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
  return guarded(err, [&] {
    BatchSummary ra = run_batch(sa, a.method, episode_options(a), a.parallelism, ids);
    BatchSummary rb = run_batch(sa, b.method, episode_options(b), b.parallelism, ids);
    BatchSummary* both[] = {&ra, &rb};
    score_against(both);

    std::string la(to_string(a.method));
    std::string lb(to_string(b.method));
    if (la == lb) {
      la += "_a";
      lb += "_b";
    }
    write_outputs(a, sa, ra, a.out_dir / la);
    write_outputs(b, sa, rb, a.out_dir / lb);

    std::ostringstream csv;
    csv << "episode,reference_time_s," << la << "_success," << la << "_completion_time_s," << lb << "_success,"
        << lb << "_completion_time_s\n";
    for (std::size_t i = 0; i < ra.episodes.size(); ++i) {
      const double t = ra.reference_times[i];
      csv << ra.episode_ids[i] << ',' << (std::isfinite(t) ? fmt("%.17g", t) : "") << ','
          << (ra.episodes[i].success ? 1 : 0) << ',' << fmt("%.17g", ra.episodes[i].completion_time) << ','
          << (rb.episodes[i].success ? 1 : 0) << ',' << fmt("%.17g", rb.episodes[i].completion_time) << '\n';
    }
    write_text(a.out_dir / "compare.csv", csv.str());

    const bool wall_clock = !a.reproducible;
    out << "scenario " << sa.name << ", " << ra.episodes.size() << " episode(s), " << to_string(a.timing)
        << " timing\n";
    print_table_header(out);
    print_row(out, la, ra, wall_clock);
    print_row(out, lb, rb, wall_clock);
    out << "wrote " << a.out_dir.string() << '\n';
    return kExitOk;
  });
}

int cmd_check(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    bool all_ok = true;
    auto report = [&](const std::string& line, bool ok, double secs) {
      out << line << (ok ? " OK" : " FAIL") << " (" << fmt("%.2f", secs) << " s)\n";
      all_ok = all_ok && ok;
    };

    auto t0 = std::chrono::steady_clock::now();
    struct Count {
      const char* scenario;
      Method method;
      int expected;
    };
    const Count counts[] = {{"reverse", Method::Msde, 145},
                            {"reverse", Method::Svm, 523},
                            {"parallel", Method::Svm, 397},
                            {"polygon", Method::Svm, 271},
                            {"circle", Method::Svm, 586}};
    std::string got;
    bool counts_ok = true;
    for (const Count& k : counts) {
      const Scenario sc = builtin_scenario(k.scenario);
      const NlpProblem p = assemble(sc, sc.initial_states.front(), VehicleInput{}, k.method);
      got += (got.empty() ? "" : "/") + std::to_string(p.num_vars);
      counts_ok = counts_ok && p.num_vars == k.expected;
    }
    report("variable counts: " + got, counts_ok, seconds_since(t0));

    t0 = std::chrono::steady_clock::now();
    const EquivalenceResult eq = polygon_equivalence(c.seed, 1000, c.solver);
    report("polygon equivalence (seed " + std::to_string(c.seed) + ", " + std::to_string(eq.disjoint) +
               " disjoint): svm " + std::to_string(eq.svm_agree) + "/" + std::to_string(eq.pairs) + ", msde " +
               std::to_string(eq.msde_agree) + "/" + std::to_string(eq.pairs),
           eq.ok(), seconds_since(t0));

    t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    int points = 0;
    int excluded = 0;
    std::string where;
    std::uint64_t seed = c.seed;
    for (const char* name : {"reverse", "circle"}) {
      for (Method m : {Method::Msde, Method::Svm}) {
        const GradientAuditResult g = audit_gradients(builtin_scenario(name), m, 25, seed++);
        points += g.points;
        excluded += g.excluded_rows;
        if (g.max_rel_error >= worst) {
          worst = g.max_rel_error;
          where = std::string(name) + "/" + std::string(to_string(m)) + " " + g.worst;
        }
      }
    }
    report("gradient audit: max rel err " + fmt("%.2e", worst) + " over " + std::to_string(points) +
               " points (" + std::to_string(excluded) + " tie rows skipped, worst at " + where + ")",
           worst < 1e-5, seconds_since(t0));

    out << (all_ok ? "all checks passed" : "some checks FAILED") << '\n';
    return all_ok ? kExitOk : kExitCheckFailed;
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Receding-horizon parking and obstacle-course planner with polygonal collision avoidance"};
  app.require_subcommand(1);

  struct Flags {
    std::vector<std::string> scenarios;
    std::vector<std::string> methods;
    std::string timing = "fixed";
    std::optional<std::string> out;
    std::optional<double> tol;
    std::optional<int> max_iters;
    int parallel = 1;
    std::optional<int> episode;
    bool batch = false;
    int subset = 0;
    bool svg = false;
    bool reproducible = false;
    std::uint64_t seed = 0;
  } f;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--timing", f.timing, "Control-cycle timing")
        ->check(CLI::IsMember({"fixed", "realtime"}, CLI::ignore_case));
    sub->add_option("--out", f.out, "Output directory (default: $POLYMPC_OUT or ./results)");
    sub->add_option("--tol", f.tol, "Solver convergence tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--max-iters", f.max_iters, "Solver iteration limit")->check(CLI::PositiveNumber);
    sub->add_option("--parallel", f.parallel, "Episodes run concurrently")->check(CLI::PositiveNumber);
    sub->add_option("--seed", f.seed, "Seed of the sampled checks");
  };
  auto episodes = [&](CLI::App* sub) {
    auto* batch = sub->add_flag("--batch", f.batch, "Run every initial state of the scenario");
    sub->add_option("--episode", f.episode, "Run a single initial state by index")
        ->check(CLI::NonNegativeNumber)
        ->excludes(batch);
    sub->add_option("--subset", f.subset, "With --batch: run this many evenly spaced initial states")
        ->check(CLI::PositiveNumber)
        ->needs(batch);
    sub->add_flag("--svg", f.svg, "Write trajectory SVGs");
    sub->add_flag("--reproducible", f.reproducible, "Leave wall-clock solve times out of the written files");
  };
  const auto method_check = CLI::IsMember({"svm", "msde"}, CLI::ignore_case);

  CLI::App* run = app.add_subcommand("run", "Simulate one episode or a batch with one method");
  run->add_option("--scenario", f.scenarios, "Built-in name or scenario JSON file")->required()->expected(1);
  run->add_option("--method", f.methods, "Collision formulation")->required()->expected(1)->check(method_check);
  common(run);
  episodes(run);

  CLI::App* compare = app.add_subcommand("compare", "Run two methods on the same episodes and compare SCT");
  compare->add_option("--scenario", f.scenarios, "Scenario, or one per method (must describe the same episodes)")
      ->required()
      ->expected(1, 2);
  compare->add_option("--method", f.methods, "Two collision formulations (default: svm msde)")
      ->expected(1, 2)
      ->check(method_check);
  common(compare);
  episodes(compare);

  CLI::App* check = app.add_subcommand("check", "Run the invariant and oracle checks");
  common(check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  RunConfig c;
  c.timing = parse_timing(CLI::detail::to_lower(f.timing));
  if (f.tol) c.solver.tol = *f.tol;
  if (f.max_iters) c.solver.max_iterations = *f.max_iters;
  c.out_dir = default_out_dir(f.out);
  c.seed = f.seed;
  c.parallelism = f.parallel;
  c.batch = f.batch;
  c.episode = f.episode.value_or(0);
  c.subset = f.subset;
  c.svg = f.svg;
  c.reproducible = f.reproducible;

  if (run->parsed()) {
    c.scenario = f.scenarios.at(0);
    c.method = parse_method(f.methods.at(0));
    return cmd_run(c, out, err);
  }
  if (compare->parsed()) {
    if (f.methods.empty()) f.methods = {"svm", "msde"};
    if (f.methods.size() != 2) {
      err << "error: compare needs two methods\n";
      return kExitBadInput;
    }
    RunConfig a = c;
    RunConfig b = c;
    a.scenario = f.scenarios.front();
    b.scenario = f.scenarios.back();
    a.method = parse_method(f.methods[0]);
    b.method = parse_method(f.methods[1]);
    return cmd_compare(a, b, out, err);
  }
  return cmd_check(c, out, err);
}

}  // namespace polympc
