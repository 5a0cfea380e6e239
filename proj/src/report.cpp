#include "polympc/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace polympc {
namespace {

// Shortest text that parses back to the same double.
std::string exact(double v) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::runtime_error("bad number '" + s + "'");
  return v;
}

int parse_int(const std::string& s) {
  std::size_t used = 0;
  const int v = std::stoi(s, &used);
  if (used != s.size()) throw std::runtime_error("bad integer '" + s + "'");
  return v;
}

struct Bounds {
  double x0 = std::numeric_limits<double>::infinity();
  double y0 = std::numeric_limits<double>::infinity();
  double x1 = -std::numeric_limits<double>::infinity();
  double y1 = -std::numeric_limits<double>::infinity();

  void add(Point2 p) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) return;
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
};

}  // namespace

void write_results_csv(std::ostream& out, const BatchSummary& batch, bool wall_clock) {
  out << kResultsHeader << '\n';
  for (std::size_t i = 0; i < batch.episodes.size(); ++i) {
    const EpisodeResult& e = batch.episodes[i];
    const VehicleState& x0 = batch.initial_states[i];
    out << batch.episode_ids[i] << ',' << exact(x0.px) << ',' << exact(x0.py) << ',' << (e.success ? 1 : 0) << ','
        << exact(e.completion_time) << ',';
    if (wall_clock) out << exact(1e3 * e.avg_solve_time()) << ',' << exact(1e3 * e.max_solve_time());
    else out << ',';
    out << ',' << (e.collision ? 1 : 0) << ',' << e.solver_failures << '\n';
  }
}

std::vector<ResultsRow> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) throw std::runtime_error("unexpected results header");
  std::vector<ResultsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split(line);
    if (f.size() != 9) throw std::runtime_error("results row needs 9 fields: " + line);
    ResultsRow r;
    r.episode = parse_int(f[0]);
    r.x0_px = parse_double(f[1]);
    r.x0_py = parse_double(f[2]);
    r.success = parse_int(f[3]) != 0;
    r.completion_time = parse_double(f[4]);
    r.collision = parse_int(f[7]) != 0;
    r.solver_failures = parse_int(f[8]);
    rows.push_back(r);
  }
  return rows;
}

double sct_from_rows(std::span<const ResultsRow> rows, std::span<const double> reference_times) {
  std::vector<EpisodeResult> episodes(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    episodes[i].success = rows[i].success;
    episodes[i].completion_time = rows[i].completion_time;
  }
  return sct(episodes, reference_times);
}

nlohmann::json summary_json(const BatchSummary& b, TimingMode timing, bool wall_clock) {
  using nlohmann::json;
  // JSON has no NaN: episodes every method failed carry a null reference time.
  json refs = json::array();
  for (double t : b.reference_times) refs.push_back(std::isfinite(t) ? json(t) : json(nullptr));
  json rows = json::array();
  for (std::size_t i = 0; i < b.episodes.size(); ++i) {
    const EpisodeResult& e = b.episodes[i];
    json row = {{"episode", b.episode_ids[i]},
                {"x0", b.initial_states[i].as_array()},
                {"success", e.success},
                {"completion_time_s", e.completion_time},
                {"collision", e.collision},
                {"solver_failures", e.solver_failures},
                {"aborted", e.aborted},
                {"cycles", e.solve_times.size()}};
    if (wall_clock) {
      row["avg_solve_ms"] = 1e3 * e.avg_solve_time();
      row["max_solve_ms"] = 1e3 * e.max_solve_time();
    }
    rows.push_back(row);
  }
  json doc = {{"scenario", b.scenario},
              {"method", std::string(to_string(b.method))},
              {"timing", std::string(to_string(timing))},
              {"episodes", b.episodes.size()},
              {"sct", b.sct},
              {"success_rate", b.success_rate},
              {"reference_times", refs},
              {"rows", rows}};
  if (wall_clock) {
    doc["avg_solve_time_s"] = b.avg_solve_time;
    doc["worst_solve_time_s"] = b.worst_solve_time;
  }
  return doc;
}

std::string trajectory_svg(const Scenario& scenario, std::span<const EpisodeResult> episodes,
                           std::span<const int> episode_ids) {
  Bounds bb;
  for (const Obstacle& o : scenario.obstacles) {
    if (const auto* poly = std::get_if<ConvexPolygon>(&o)) {
      for (const Point2& v : poly->vertices()) bb.add(v);
    } else {
      const auto& c = std::get<CircleObstacle>(o);
      bb.add({c.center.x - c.radius, c.center.y - c.radius});
      bb.add({c.center.x + c.radius, c.center.y + c.radius});
    }
  }
  const ConvexPolygon goal = footprint(scenario.x_ref, scenario.vehicle);
  for (const Point2& v : goal.vertices()) bb.add(v);
  for (const EpisodeResult& e : episodes) {
    for (const TraceSample& s : e.trace) bb.add({s.state.px, s.state.py});
  }
  if (!(bb.x1 >= bb.x0)) bb = Bounds{-1.0, -1.0, 1.0, 1.0};
  constexpr double kScale = 40.0;  // px per meter
  constexpr double kPad = 1.0;     // m
  const double w = (bb.x1 - bb.x0 + 2 * kPad) * kScale;
  const double h = (bb.y1 - bb.y0 + 2 * kPad) * kScale;
  auto px = [&](Point2 p) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f,%.2f", (p.x - bb.x0 + kPad) * kScale, (bb.y1 + kPad - p.y) * kScale);
    return std::string(buf);
  };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << exact(std::round(w)) << "\" height=\""
      << exact(std::round(h)) << "\" viewBox=\"0 0 " << exact(std::round(w)) << ' ' << exact(std::round(h))
      << "\">\n";
  svg << "  <rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const Obstacle& o : scenario.obstacles) {
    if (const auto* poly = std::get_if<ConvexPolygon>(&o)) {
      svg << "  <polygon points=\"";
      for (std::size_t i = 0; i < poly->size(); ++i) svg << (i ? " " : "") << px((*poly)[i]);
      svg << "\" fill=\"#9e9e9e\" stroke=\"black\" stroke-width=\"1\"/>\n";
    } else {
      const auto& c = std::get<CircleObstacle>(o);
      const std::string centre = px(c.center);
      const auto comma = centre.find(',');
      svg << "  <circle cx=\"" << centre.substr(0, comma) << "\" cy=\"" << centre.substr(comma + 1) << "\" r=\""
          << exact(c.radius * kScale) << "\" fill=\"#9e9e9e\" stroke=\"black\" stroke-width=\"1\"/>\n";
    }
  }
  svg << "  <path d=\"M ";
  for (std::size_t i = 0; i < goal.size(); ++i) svg << (i ? " L " : "") << px(goal[i]);
  svg << " Z\" fill=\"none\" stroke=\"green\" stroke-width=\"1.5\" stroke-dasharray=\"4 3\"/>\n";
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    const EpisodeResult& ep = episodes[e];
    const char* colour = ep.collision ? "red" : ep.success ? "#1f77b4" : "#ff7f0e";
    svg << "  <polyline data-episode=\"" << (e < episode_ids.size() ? episode_ids[e] : static_cast<int>(e))
        << "\" points=\"";
    for (std::size_t i = 0; i < ep.trace.size(); ++i) {
      svg << (i ? " " : "") << px({ep.trace[i].state.px, ep.trace[i].state.py});
    }
    svg << "\" fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace polympc
