#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polympc/constraints.hpp"
#include "polympc/nlp.hpp"
#include "polympc/scenario.hpp"

namespace polympc {

struct PolygonPair {
  ConvexPolygon ego;
  ConvexPolygon obstacle;
};

/// Pairs of convex polygons with 3..8 vertices each, drawn on random ellipses.
/// The second centre is offset so that roughly half of the pairs overlap.
/// Deterministic in `seed`.
std::vector<PolygonPair> random_polygon_pairs(std::uint64_t seed, int count);

/// Fixed-vertex separating-line subproblem over (a, b, c): minimise the line
/// regulariser subject to the labelled residuals being >= 0.
NlpProblem svm_separation_problem(const ConvexPolygon& ego, const ConvexPolygon& obstacle,
                                  double eps = kSvmEpsilon, double alpha = kSvmAlpha);

struct SeparationResult {
  bool separable = false;  // converged and the line strictly separates every vertex
  SeparatingLine line;
  SolveResult solve;
};

/// Starts from the centroid line.
SeparationResult svm_separate(const ConvexPolygon& ego, const ConvexPolygon& obstacle,
                              const SolverOptions& options = {});

struct EquivalenceResult {
  int pairs = 0;
  int disjoint = 0;     // pairs the exact intersection test calls disjoint
  int svm_agree = 0;    // separable by the line subproblem <=> disjoint
  int msde_agree = 0;   // all MSDE residuals >= 0 <=> no vertex strictly inside the other
  bool ok() const { return svm_agree == pairs && msde_agree == pairs; }
};

/// Runs both collision formulations on random_polygon_pairs(seed, count).
EquivalenceResult polygon_equivalence(std::uint64_t seed, int count, const SolverOptions& options = {});

/// 7N - 2 plus three line variables per obstacle and step for Method::Svm.
int expected_num_vars(int horizon, int num_obstacles, Method method);

struct GradientAuditResult {
  double max_rel_error = 0.0;  // |fd - analytic| / max(1, |analytic|)
  int points = 0;
  int excluded_rows = 0;       // minimum-ties skipped in the inequality Jacobian
  std::string worst;           // where max_rel_error occurred
};

/// Central differences of objective, equality and inequality values against
/// the analytic gradient and Jacobians at `points` random decision vectors
/// scattered around the scenario's initial states, each with a reference pose
/// drawn near its start. Minimum-distance rows whose two smallest edge values
/// are within `tie_gap` are skipped.
GradientAuditResult audit_gradients(const Scenario& scenario, Method method, int points, std::uint64_t seed,
                                    double step = 1e-6, double tie_gap = 1e-5);

}  // namespace polympc
